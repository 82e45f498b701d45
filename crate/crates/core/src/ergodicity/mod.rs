//! Ergodicity of toral and solenoidal endomorphisms: exact certificates,
//! rational invariant splittings, rank-one factors and ergodic ℤ² subgroups.

mod search;
mod splitting;

use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::{
    charpoly_rational, cyclotomic, cyclotomic_indices_up_to_degree, poly_gcd, primitive_integer_vector, AlgebraError,
    IntMatrix, QMatrix, RationalPoly,
};
use crate::spectra::SpectraError;

pub use search::{
    ergodic_element, ergodic_z2_subgroup, non_ergodic_primitive_triples, search_order, ErgodicZ2, NonErgodicTriple,
};
pub use splitting::{has_rank_one_factor, rational_splitting, RankOneVerdict, RationalSplitting, SplittingBlock};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErgodicityError {
    #[error("no ergodic element with sup norm at most {0}")]
    NotFound(u64),
    #[error("A^{0} B^{1} is not ergodic, so the triple criterion does not apply")]
    HypothesisViolated(i64, i64),
    #[error("bounded factor search was inconclusive; the splitting may be coarser than irreducible")]
    FactorSearchInconclusive,
    #[error("block {block} has a rank-one factor (place rank {rank})")]
    RankOneFactor { block: usize, rank: usize },
    #[error("no ergodic Z^2 subgroup certified up to bound {bound}; {} obstructing vectors", obstructions.len())]
    NoErgodicSubgroupFound { bound: u64, obstructions: Vec<Vec<i64>> },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ergodic,
    NonErgodic,
}

/// Exact ergodicity certificate for one endomorphism.
///
/// Ergodic verdicts list every `m` with `φ(m) ≤ d` for which
/// `gcd(charpoly, Φ_m) = 1` was checked. Non-ergodic verdicts name the
/// cyclotomic factor `Φ_m` and a primitive integer dual vector `z` with
/// `(Aᵀ)^m z = z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicityCertificate {
    pub verdict: Verdict,
    pub checked: Vec<u64>,
    pub cyclotomic_index: Option<u64>,
    pub dual_vector: Option<Vec<num_bigint::BigInt>>,
}

impl ErgodicityCertificate {
    pub fn is_ergodic(&self) -> bool {
        self.verdict == Verdict::Ergodic
    }

    /// Re-checks the certificate against `a` with one gcd per index or one
    /// matrix power.
    pub fn verify(&self, a: &QMatrix) -> Result<bool, AlgebraError> {
        let f = charpoly_rational(a);
        match self.verdict {
            Verdict::Ergodic => {
                let all = cyclotomic_indices_up_to_degree(a.n_rows());
                if self.checked != all {
                    return Ok(false);
                }
                for &m in &all {
                    if poly_gcd(&f, &cyclotomic(m))?.degree() != Some(0) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Verdict::NonErgodic => {
                let (Some(m), Some(z)) = (self.cyclotomic_index, &self.dual_vector) else {
                    return Ok(false);
                };
                let zq: Vec<BigRational> = z.iter().map(|x| BigRational::from_integer(x.clone())).collect();
                let image = a.transpose().pow(m).mul_vec(&zq);
                Ok(cyclotomic(m).divides(&f) && image == zq && zq.iter().any(|x| *x != BigRational::from_integer(0.into())))
            }
        }
    }
}

/// Certificate for an integer matrix.
pub fn is_ergodic(a: &IntMatrix) -> ErgodicityCertificate {
    is_ergodic_rational(&a.to_rational())
}

/// Certificate for a rational matrix (elements `ρ(a)` with negative
/// exponents). Roots of unity among the eigenvalues are detected by
/// `gcd(charpoly, Φ_m)` over ℚ, which is insensitive to denominators.
pub fn is_ergodic_rational(a: &QMatrix) -> ErgodicityCertificate {
    let d = a.n_rows();
    let f = charpoly_rational(a);
    let mut checked = Vec::new();
    for m in cyclotomic_indices_up_to_degree(d) {
        let phi = cyclotomic(m);
        if phi.divides(&f) {
            // Φ_m is irreducible, so a nontrivial gcd means Φ_m | f
            return ErgodicityCertificate {
                verdict: Verdict::NonErgodic,
                checked,
                cyclotomic_index: Some(m),
                dual_vector: Some(periodic_dual_vector(a, m)),
            };
        }
        checked.push(m);
    }
    ErgodicityCertificate { verdict: Verdict::Ergodic, checked, cyclotomic_index: None, dual_vector: None }
}

/// Primitive integer `z ≠ 0` with `(Aᵀ)^m z = z`.
fn periodic_dual_vector(a: &QMatrix, m: u64) -> Vec<num_bigint::BigInt> {
    let n = a.n_rows();
    let k = a.transpose().pow(m).sub(&QMatrix::identity(n)).kernel();
    assert!(k.n_cols() > 0, "a root of unity of order m forces a fixed vector of the m-th power");
    primitive_integer_vector(&k.column(0))
}

/// `true` when `f` has a root that is a root of unity.
pub fn has_cyclotomic_factor(f: &RationalPoly) -> bool {
    let d = f.degree().unwrap_or(0);
    cyclotomic_indices_up_to_degree(d).into_iter().any(|m| cyclotomic(m).divides(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    #[test]
    fn examples() {
        let shear = is_ergodic(&m(&[vec![1, 1], vec![0, 1]]));
        assert_eq!(shear.verdict, Verdict::NonErgodic);
        assert_eq!(shear.cyclotomic_index, Some(1));
        let cat = is_ergodic(&m(&[vec![2, 1], vec![1, 1]]));
        assert!(cat.is_ergodic());
        assert_eq!(cat.checked, vec![1, 2, 3, 4, 6]);
        let rot = is_ergodic(&m(&[vec![0, -1], vec![1, 0]]));
        assert_eq!(rot.cyclotomic_index, Some(4));
        for (a, c) in [(m(&[vec![1, 1], vec![0, 1]]), shear), (m(&[vec![2, 1], vec![1, 1]]), cat), (m(&[vec![0, -1], vec![1, 0]]), rot)] {
            assert!(c.verify(&a.to_rational()).unwrap());
        }
    }

    #[test]
    fn inverse_is_handled_over_q() {
        let a = m(&[vec![2, 0], vec![0, 3]]);
        let inv = a.to_rational().inverse().unwrap();
        assert!(is_ergodic_rational(&inv).is_ergodic());
        // a·a⁻¹ is the identity
        assert!(!is_ergodic_rational(&inv.mul(&a.to_rational())).is_ergodic());
    }

    /// Brute-force dual orbit search: some nonzero `z` with small entries
    /// is periodic under `Aᵀ` with period at most 12.
    fn brute_periodic(a: &IntMatrix) -> bool {
        let t = a.transpose();
        let powers: Vec<IntMatrix> = (1..=12).map(|k| t.pow(k)).collect();
        for x in -50i64..=50 {
            for y in -50i64..=50 {
                if x == 0 && y == 0 {
                    continue;
                }
                let z = [num_bigint::BigInt::from(x), num_bigint::BigInt::from(y)];
                if powers.iter().any(|p| p.mul_vec(&z) == z) {
                    return true;
                }
            }
        }
        false
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn agrees_with_brute_force_and_powers(e in proptest::collection::vec(-3i64..=3, 4)) {
            let a = m(&[vec![e[0], e[1]], vec![e[2], e[3]]]);
            prop_assume!(e[0] * e[3] - e[1] * e[2] != 0);
            let c = is_ergodic(&a);
            prop_assert!(c.verify(&a.to_rational()).unwrap());
            if brute_periodic(&a) {
                prop_assert!(!c.is_ergodic());
            }
            if c.is_ergodic() {
                prop_assert!(!brute_periodic(&a));
            }
            for k in [2, 3] {
                prop_assert_eq!(is_ergodic(&a.pow(k)).is_ergodic(), c.is_ergodic());
            }
        }
    }
}
