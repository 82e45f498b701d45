//! Step-2 nilpotent groups in exponential (first kind) coordinates over ℤ,
//! ℚ and truncated ℤ_p: the BCH group law, derived series, automorphisms,
//! the two-stage Chinese remainder construction and coordinate splittings.

mod coords;
mod crt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::field::{self, in_span, rref};
use crate::algebra::padic::rational_mod_pk;
use crate::algebra::QMatrix;

pub use coords::{bracket_inclusion_check, uvs_decompose, BracketVerdict, TaggedSubspace, UvsParts};
pub use crt::{nil_crt, CrtCheck, CrtSolution, CrtStage, CrtTarget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NilError {
    #[error("elements live over different scalar rings")]
    ScalarMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bracket index out of range")]
    IndexOutOfRange,
    #[error("bracket [e{0}, e{1}] is not antisymmetric")]
    NotAntisymmetric(usize, usize),
    #[error("[e{0}, [e{1}, e{2}]] is nonzero; only step 2 is supported")]
    NotStepTwo(usize, usize, usize),
    #[error("the derived algebra is not spanned by basis vectors")]
    BasisNotAdapted,
    #[error("[e{0}, e{1}] leaves the lattice: half the structure constant is not integral")]
    LatticeNotClosed(usize, usize),
    #[error("the map does not respect [e{0}, e{1}]")]
    NotAnAutomorphism(usize, usize),
    #[error("the map is not {0}-integral")]
    NotPIntegral(u64),
    #[error("the tagged subspaces do not form a direct sum of the algebra")]
    SplittingNotDirect,
    #[error("subspace {0} is not a subalgebra")]
    NotSubalgebra(usize),
    #[error("the three subspaces are not a direct sum of the algebra")]
    NotDirectSum,
    #[error("no exact decomposition found")]
    DecompositionFailed,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} appears twice among the targets")]
    RepeatedPrime(u64),
    #[error("level {level} exceeds the precision {precision} of the {prime}-adic target")]
    LevelExceedsPrecision { prime: u64, level: u32, precision: u32 },
    #[error("CRT solution failed its congruence check at p = {0}")]
    CrtVerificationFailed(u64),
}

/// A step-≤2 nilpotent Lie algebra over ℚ given by structure constants in a
/// basis `f_1..f_d` of the lattice `log N(ℤ)`.
///
/// Products use `log(exp X · exp Y) = X + Y + ½[X, Y]`. Integer points
/// form a group exactly when `½ c_{ij}^k ∈ ℤ`; for the Heisenberg group this
/// is the normalization `[f_1, f_2] = 2 f_3`.
#[derive(Clone, Debug, PartialEq)]
pub struct NilStructure {
    dim: usize,
    /// `c[i][j][k]`: coefficient of `f_k` in `[f_i, f_j]`.
    c: Vec<Vec<Vec<BigRational>>>,
    derived: Vec<usize>,
}

impl NilStructure {
    /// `brackets` lists `[e_i, e_j] = c·e_k` as `(i, j, k, c)` with 0-based
    /// indices; the opposite order is implied. `lattice_scaling[i] = s_i`
    /// declares the lattice basis `f_i = s_i e_i` (default all ones).
    pub fn new(
        dim: usize,
        brackets: &[(usize, usize, usize, BigRational)],
        lattice_scaling: Option<&[BigRational]>,
    ) -> Result<Self, NilError> {
        let ones = vec![BigRational::one(); dim];
        let s = lattice_scaling.unwrap_or(&ones);
        if s.len() != dim {
            return Err(NilError::DimensionMismatch { expected: dim, found: s.len() });
        }
        let mut c = vec![vec![vec![BigRational::zero(); dim]; dim]; dim];
        let mut set = vec![vec![vec![false; dim]; dim]; dim];
        for (i, j, k, v) in brackets {
            let (i, j, k) = (*i, *j, *k);
            if i >= dim || j >= dim || k >= dim || s[i].is_zero() {
                return Err(NilError::IndexOutOfRange);
            }
            if i == j {
                if !v.is_zero() {
                    return Err(NilError::NotAntisymmetric(i, j));
                }
                continue;
            }
            // in the lattice basis: [f_i, f_j] = c s_i s_j / s_k · f_k
            let w = v * &s[i] * &s[j] / &s[k];
            for (a, b, val) in [(i, j, w.clone()), (j, i, -w)] {
                if set[a][b][k] && c[a][b][k] != val {
                    return Err(NilError::NotAntisymmetric(i, j));
                }
                set[a][b][k] = true;
                c[a][b][k] = val;
            }
        }
        let structure = NilStructure { dim, c, derived: Vec::new() };
        structure.validate()
    }

    fn validate(mut self) -> Result<Self, NilError> {
        let d = self.dim;
        let two = BigRational::from_integer(2.into());
        for i in 0..d {
            for j in 0..d {
                if self.c[i][j].iter().any(|x| !(x / &two).is_integer()) {
                    return Err(NilError::LatticeNotClosed(i.min(j), i.max(j)));
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                for cc in 0..d {
                    let inner = self.c[b][cc].clone();
                    if !self.bracket(&unit(d, a), &inner).iter().all(Zero::is_zero) {
                        return Err(NilError::NotStepTwo(a, b, cc));
                    }
                }
            }
        }
        // [N, N] must be a coordinate subspace
        let mut rows: Vec<Vec<BigRational>> =
            (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.c[i][j].clone()).collect();
        let pivots = rref(&mut rows);
        for (r, &p) in pivots.iter().enumerate() {
            if rows[r].iter().enumerate().any(|(j, x)| j != p && !x.is_zero()) {
                return Err(NilError::BasisNotAdapted);
            }
        }
        self.derived = pivots;
        Ok(self)
    }

    /// `[f_1, f_2] = 2 f_3`.
    pub fn heisenberg() -> Self {
        Self::new(3, &[(0, 1, 2, BigRational::from_integer(2.into()))], None).expect("valid")
    }

    pub fn abelian(dim: usize) -> Self {
        Self::new(dim, &[], None).expect("valid")
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim + other.dim;
        let mut c = vec![vec![vec![BigRational::zero(); d]; d]; d];
        for (off, s) in [(0, self), (self.dim, other)] {
            for i in 0..s.dim {
                for j in 0..s.dim {
                    for k in 0..s.dim {
                        c[off + i][off + j][off + k] = s.c[i][j][k].clone();
                    }
                }
            }
        }
        NilStructure { dim: d, c, derived: Vec::new() }.validate().expect("direct sums stay valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basis indices spanning `[N, N]`.
    pub fn derived_indices(&self) -> &[usize] {
        &self.derived
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.c[i][j][k]
    }

    /// Lie bracket in the lattice basis over any field containing ℚ.
    pub fn bracket<F: field::Field>(&self, x: &[F], y: &[F]) -> Vec<F> {
        let d = self.dim;
        let mut out = vec![<F as field::Field>::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if i == j || y[j].is_zero() {
                    continue;
                }
                let xy = x[i].mul(&y[j]);
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.c[i][j][k];
                    if !c.is_zero() {
                        *o = o.add(&xy.mul(&<F as field::Field>::from_rational(c)));
                    }
                }
            }
        }
        out
    }

    /// Derived series `N = N₀ ⊃ N₁ ⊃ … ⊃ {0}` as bases in echelon form.
    pub fn derived_series(&self) -> Vec<Vec<Vec<BigRational>>> {
        let d = self.dim;
        let mut current: Vec<Vec<BigRational>> = (0..d).map(|i| unit(d, i)).collect();
        let mut out = vec![current.clone()];
        while !current.is_empty() {
            let mut next: Vec<Vec<BigRational>> = Vec::new();
            for u in &current {
                for v in &current {
                    next.push(self.bracket(u, v));
                }
            }
            let r = rref(&mut next).len();
            next.truncate(r);
            out.push(next.clone());
            current = next;
        }
        out
    }
}

fn unit(d: usize, i: usize) -> Vec<BigRational> {
    (0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scalars {
    Integer,
    Rational,
    /// ℤ_p modulo `p^precision`.
    Padic { p: u64, precision: u32 },
}

/// `exp(Σ x_i f_i)` with coordinates in the given scalar ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NilElement {
    ring: Scalars,
    coords: Vec<BigRational>,
}

impl NilElement {
    pub fn integer(x: &[i64]) -> Self {
        NilElement { ring: Scalars::Integer, coords: x.iter().map(|&v| BigRational::from_integer(v.into())).collect() }
    }

    pub fn from_integers(x: Vec<BigInt>) -> Self {
        NilElement { ring: Scalars::Integer, coords: x.into_iter().map(BigRational::from_integer).collect() }
    }

    pub fn rational(x: Vec<BigRational>) -> Self {
        NilElement { ring: Scalars::Rational, coords: x }
    }

    /// Residues are reduced into `[0, p^K)`.
    pub fn padic(p: u64, precision: u32, x: Vec<BigInt>) -> Self {
        NilElement { ring: Scalars::Padic { p, precision }, coords: x.into_iter().map(BigRational::from_integer).collect() }
            .reduced()
            .expect("integers are p-integral")
    }

    pub fn identity(ring: Scalars, dim: usize) -> Self {
        NilElement { ring, coords: vec![BigRational::zero(); dim] }
    }

    pub fn ring(&self) -> Scalars {
        self.ring
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Image in `N(ℤ_p)` mod `p^K` of an integer or p-integral rational point.
    pub fn to_padic(&self, p: u64, precision: u32) -> Result<Self, NilError> {
        NilElement { ring: Scalars::Padic { p, precision }, coords: self.coords.clone() }.reduced()
    }

    fn reduced(mut self) -> Result<Self, NilError> {
        if let Scalars::Padic { p, precision } = self.ring {
            for x in self.coords.iter_mut() {
                let r = rational_mod_pk(x, p, precision).ok_or(NilError::NotPIntegral(p))?;
                *x = BigRational::from_integer(r);
            }
        }
        Ok(self)
    }

    /// Same element with coordinates in a ring chosen for the values:
    /// integer input stays integral when possible, otherwise becomes
    /// rational.
    fn with_values(&self, coords: Vec<BigRational>) -> Result<Self, NilError> {
        let ring = match self.ring {
            Scalars::Integer if !coords.iter().all(|x| x.is_integer()) => Scalars::Rational,
            r => r,
        };
        NilElement { ring, coords }.reduced()
    }
}

fn check_pair(s: &NilStructure, g: &NilElement, h: &NilElement) -> Result<(), NilError> {
    if g.ring != h.ring {
        return Err(NilError::ScalarMismatch);
    }
    for x in [g, h] {
        if x.dim() != s.dim {
            return Err(NilError::DimensionMismatch { expected: s.dim, found: x.dim() });
        }
    }
    Ok(())
}

/// `X + Y + ½[X, Y]`.
pub fn nil_mul(s: &NilStructure, g: &NilElement, h: &NilElement) -> Result<NilElement, NilError> {
    check_pair(s, g, h)?;
    let half = BigRational::new(1.into(), 2.into());
    let br = s.bracket(&g.coords, &h.coords);
    let coords = (0..s.dim).map(|k| &g.coords[k] + &h.coords[k] + &half * &br[k]).collect();
    NilElement { ring: g.ring, coords }.reduced()
}

/// `exp(X)^{-1} = exp(−X)`.
pub fn nil_inv(s: &NilStructure, g: &NilElement) -> Result<NilElement, NilError> {
    if g.dim() != s.dim {
        return Err(NilError::DimensionMismatch { expected: s.dim, found: g.dim() });
    }
    NilElement { ring: g.ring, coords: g.coords.iter().map(|x| -x).collect() }.reduced()
}

/// Checks `L[f_i, f_j] = [L f_i, L f_j]` on basis pairs.
pub fn check_automorphism(s: &NilStructure, l: &QMatrix) -> Result<(), NilError> {
    let d = s.dim;
    if l.n_rows() != d || l.n_cols() != d {
        return Err(NilError::DimensionMismatch { expected: d, found: l.n_rows() });
    }
    if l.det().is_zero() {
        return Err(NilError::NotAnAutomorphism(0, 0));
    }
    let cols = l.columns();
    for i in 0..d {
        for j in i + 1..d {
            let lhs = l.mul_vec(&s.bracket(&unit(d, i), &unit(d, j)));
            if lhs != s.bracket(&cols[i], &cols[j]) {
                return Err(NilError::NotAnAutomorphism(i, j));
            }
        }
    }
    Ok(())
}

/// Image of `g` under the group automorphism `exp ∘ L ∘ log`.
pub fn automorphism_action(s: &NilStructure, l: &QMatrix, g: &NilElement) -> Result<NilElement, NilError> {
    check_automorphism(s, l)?;
    if g.dim() != s.dim {
        return Err(NilError::DimensionMismatch { expected: s.dim, found: g.dim() });
    }
    g.with_values(l.mul_vec(&g.coords))
}

/// `true` when `v` lies in `span(basis)`.
pub(crate) fn spans<F: field::Field>(basis: &[Vec<F>], v: &[F]) -> bool {
    in_span(basis, v)
}
