use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{nil_inv, nil_mul, NilElement, NilError, NilStructure, Scalars};
use crate::algebra::is_prime;
use crate::algebra::padic::{mod_inverse, p_pow};

/// `ξ_p ∈ N(ℤ_p)` (mod `p^K`) together with the level `l_p ≤ K`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrtTarget {
    pub xi: NilElement,
    pub level: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrtStage {
    pub label: String,
    pub factor: NilElement,
}

/// `n^{-1}·ξ_p` reduced mod `p^K` and whether it vanishes mod `p^{l_p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrtCheck {
    pub prime: u64,
    pub level: u32,
    pub residual: NilElement,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrtSolution {
    pub n: NilElement,
    pub stages: Vec<CrtStage>,
    pub checks: Vec<CrtCheck>,
}

/// Componentwise integer CRT on the listed coordinates; other coordinates
/// are zero. Solutions lie in `[0, ∏ p^{l_p})`.
fn integer_crt(coords: &[usize], dim: usize, targets: &[(u64, u32, &NilElement)]) -> Vec<BigInt> {
    let mut n = vec![BigInt::zero(); dim];
    let mut modulus = BigInt::one();
    for &(p, level, xi) in targets {
        if level == 0 {
            continue;
        }
        let m = p_pow(p, level);
        let inv = mod_inverse(&modulus.mod_floor(&m), &m).expect("distinct primes");
        for &i in coords {
            let r = xi.coords()[i].to_integer();
            let t = ((&r - &n[i]) * &inv).mod_floor(&m);
            n[i] += &modulus * t;
        }
        modulus *= m;
    }
    n
}

fn vanishes(e: &NilElement, p: u64, level: u32) -> bool {
    let m = BigRational::from_integer(p_pow(p, level));
    e.coords().iter().all(|x| (x / &m).is_integer())
}

/// Integer `n` with `n^{-1}·ξ_p ≡ e (mod p^{l_p})` for every target.
///
/// Stage one solves the congruences on the coordinates outside `[N, N]` by
/// integer CRT. Stage two removes the remaining central discrepancy
/// `n_1^{-1}ξ_p` with a central factor. The result is checked by group
/// arithmetic before it is returned.
pub fn nil_crt(s: &NilStructure, targets: &[CrtTarget]) -> Result<CrtSolution, NilError> {
    let d = s.dim();
    let mut seen = Vec::new();
    let mut parts = Vec::new();
    for t in targets {
        let Scalars::Padic { p, precision } = t.xi.ring() else {
            return Err(NilError::ScalarMismatch);
        };
        if t.xi.dim() != d {
            return Err(NilError::DimensionMismatch { expected: d, found: t.xi.dim() });
        }
        if !is_prime(p) {
            return Err(NilError::NotPrime(p));
        }
        if t.level > precision {
            return Err(NilError::LevelExceedsPrecision { prime: p, level: t.level, precision });
        }
        if seen.contains(&p) {
            return Err(NilError::RepeatedPrime(p));
        }
        seen.push(p);
        parts.push((p, precision, t.level, &t.xi));
    }
    let derived = s.derived_indices();
    let outer: Vec<usize> = (0..d).filter(|i| !derived.contains(i)).collect();
    let crt_input: Vec<(u64, u32, &NilElement)> = parts.iter().map(|&(p, _, l, xi)| (p, l, xi)).collect();
    let n1 = NilElement::from_integers(integer_crt(&outer, d, &crt_input));

    let mut etas = Vec::new();
    for &(p, k, l, xi) in &parts {
        let eta = nil_mul(s, &nil_inv(s, &n1.to_padic(p, k)?)?, xi)?;
        debug_assert!(outer.iter().all(|&i| (eta.coords()[i].clone() / BigRational::from_integer(p_pow(p, l))).is_integer()));
        etas.push((p, l, eta));
    }
    let eta_refs: Vec<(u64, u32, &NilElement)> = etas.iter().map(|(p, l, e)| (*p, *l, e)).collect();
    let n2 = NilElement::from_integers(integer_crt(derived, d, &eta_refs));
    let n = nil_mul(s, &n1, &n2)?;

    let mut checks = Vec::new();
    for &(p, k, l, xi) in &parts {
        let residual = nil_mul(s, &nil_inv(s, &n.to_padic(p, k)?)?, xi)?;
        let holds = vanishes(&residual, p, l);
        if !holds {
            return Err(NilError::CrtVerificationFailed(p));
        }
        checks.push(CrtCheck { prime: p, level: l, residual, holds });
    }
    let stages = vec![
        CrtStage { label: "abelianization".into(), factor: n1 },
        CrtStage { label: "centre".into(), factor: n2 },
    ];
    Ok(CrtSolution { n, stages, checks })
}
