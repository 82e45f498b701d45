use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;

use super::ErgodicityError;
use crate::algebra::field::kernel;
use crate::algebra::{charpoly, factor_over_q, saturate, AlgebraError, IntMatrix, QMatrix, RationalPoly};
use crate::spectra::{joint_spectrum, ActionSpec, DEFAULT_TOL};

/// One invariant rational subspace, described by a saturated integer basis
/// (a basis of the subspace's intersection with ℤ^d), together with the
/// generators written in that basis, which are therefore integral.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingBlock {
    pub basis: Vec<Vec<BigInt>>,
    pub generators: Vec<IntMatrix>,
}

impl SplittingBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn basis_matrix(&self) -> QMatrix {
        let cols: Vec<Vec<BigRational>> =
            self.basis.iter().map(|v| v.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
        QMatrix::from_columns(&cols)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalSplitting {
    pub blocks: Vec<SplittingBlock>,
    /// Some characteristic polynomial could not be fully factored; its
    /// square-free decomposition was used instead, so blocks may be coarser
    /// than irreducible.
    pub inconclusive: bool,
}

/// Joint primary decomposition: each block of the previous generators is
/// intersected with the generalized kernels `ker g(A_i)^m` of the irreducible
/// factors `g^m` of `charpoly(A_i)`.
pub fn rational_splitting(action: &ActionSpec) -> RationalSplitting {
    let d = action.dim();
    let mut inconclusive = false;
    let unit = |i: usize| -> Vec<BigRational> {
        (0..d).map(|j| BigRational::from_integer(BigInt::from((i == j) as i64))).collect()
    };
    let mut blocks: Vec<Vec<Vec<BigRational>>> = vec![(0..d).map(unit).collect()];
    for g in action.generators() {
        let f = charpoly(g);
        let factors: Vec<(RationalPoly, usize)> = match factor_over_q(&f) {
            Ok(v) => v,
            Err(AlgebraError::FactorSearchInconclusive) => {
                inconclusive = true;
                f.square_free_decomposition()
            }
            Err(e) => unreachable!("characteristic polynomials are nonzero: {e}"),
        };
        let gq = g.to_rational();
        let kernels: Vec<Vec<Vec<BigRational>>> = factors
            .iter()
            .map(|(h, mult)| h.pow(*mult).eval_matrix(&gq).kernel().columns())
            .collect();
        let mut next = Vec::new();
        for block in &blocks {
            for k in &kernels {
                let meet = intersect(block, k, d);
                if !meet.is_empty() {
                    next.push(meet);
                }
            }
        }
        blocks = next;
    }
    let blocks = blocks
        .iter()
        .map(|b| {
            let basis = saturate(b, d);
            let mut block = SplittingBlock { basis, generators: Vec::new() };
            let bm = block.basis_matrix();
            block.generators = action
                .generators()
                .iter()
                .map(|g| {
                    let r = bm.solve_right(&g.to_rational().mul(&bm)).expect("block is invariant");
                    r.to_int_matrix().expect("saturated lattices are preserved by integer matrices")
                })
                .collect();
            block
        })
        .collect();
    RationalSplitting { blocks, inconclusive }
}

/// Basis of `span(u) ∩ span(v)` in ℚ^d.
fn intersect(u: &[Vec<BigRational>], v: &[Vec<BigRational>], d: usize) -> Vec<Vec<BigRational>> {
    if u.is_empty() || v.is_empty() {
        return Vec::new();
    }
    // solve Σ a_i u_i = Σ b_j v_j
    let n = u.len() + v.len();
    let rows: Vec<Vec<BigRational>> = (0..d)
        .map(|r| u.iter().map(|x| x[r].clone()).chain(v.iter().map(|x| -x[r].clone())).collect())
        .collect();
    let mut out: Vec<Vec<BigRational>> = kernel(&rows, n)
        .iter()
        .map(|c| (0..d).map(|r| u.iter().zip(c).map(|(x, a)| &x[r] * a).sum()).collect())
        .collect();
    let mut m = out.clone();
    let piv = crate::algebra::field::rref(&mut m);
    out = m.into_iter().take(piv.len()).collect();
    out
}

/// Per-block place rank and the first block of rank at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneVerdict {
    pub block_ranks: Vec<usize>,
    pub offending_block: Option<usize>,
}

impl RankOneVerdict {
    pub fn has_rank_one_factor(&self) -> bool {
        self.offending_block.is_some()
    }
}

/// Rank of the span of the joint Lyapunov functionals (all places) of each
/// splitting block; a block of rank at most one is a rank-one factor.
pub fn has_rank_one_factor(action: &ActionSpec) -> Result<RankOneVerdict, ErgodicityError> {
    let split = rational_splitting(action);
    if split.inconclusive {
        return Err(ErgodicityError::FactorSearchInconclusive);
    }
    let k = action.rank();
    let mut block_ranks = Vec::new();
    for block in &split.blocks {
        let sub = ActionSpec::new(block.generators.clone(), None)?;
        let spec = joint_spectrum(&sub, DEFAULT_TOL)?;
        let values: Vec<f64> = spec.functionals.iter().flat_map(|f| f.values.iter().copied()).collect();
        let m = DMatrix::from_row_slice(spec.functionals.len(), k, &values);
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        block_ranks.push(if scale == 0.0 { 0 } else { m.rank(1e-8 * scale) });
    }
    let offending_block = block_ranks.iter().position(|&r| r <= 1);
    Ok(RankOneVerdict { block_ranks, offending_block })
}
