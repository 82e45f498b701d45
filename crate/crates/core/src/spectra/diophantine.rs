//! Empirical Diophantine constants over a box of integer vectors.

use num_bigint::BigInt;
use num_integer::Integer;

use crate::algebra::padic::{p_pow, vp_int};
use crate::algebra::PadicTruncated;

/// Minimum of `|⟨z, w⟩|·‖z‖∞^L` over the box, with its argument.
#[derive(Clone, Debug, PartialEq)]
pub struct DiophantineMinimum {
    pub value: f64,
    pub argmin: Vec<i64>,
    /// p-adic variant only: the minimizing pairing vanished to the working
    /// precision, so `value` is an upper bound.
    pub truncated: bool,
}

/// Nonzero `z` in `[-B, B]^l` whose last nonzero coordinate is positive
/// (one of each `±z` pair), by sup norm and then lexicographically.
fn candidates(l: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut boxed: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..l {
        boxed = boxed.into_iter().flat_map(|z| (-bound..=bound).map(move |x| [z.clone(), vec![x]].concat())).collect();
    }
    let sup = |z: &Vec<i64>| z.iter().map(|x| x.abs()).max().unwrap();
    let mut out: Vec<Vec<i64>> =
        boxed.into_iter().filter(|z| z.iter().rev().find(|&&x| x != 0).is_some_and(|&x| x > 0)).collect();
    out.sort_by_key(sup);
    out
}

/// Exhaustive real profile. Ties keep the earliest candidate.
pub fn diophantine_profile(w: &[f64], l: f64, bound: u64) -> DiophantineMinimum {
    assert!(!w.is_empty() && bound >= 1, "need a nonempty vector and a positive bound");
    let mut best = DiophantineMinimum { value: f64::INFINITY, argmin: vec![], truncated: false };
    for z in candidates(w.len(), bound as i64) {
        let dot: f64 = z.iter().zip(w).map(|(&a, b)| a as f64 * b).sum();
        let norm = z.iter().map(|x| x.abs()).max().unwrap() as f64;
        let v = dot.abs() * norm.powf(l);
        if v < best.value {
            best = DiophantineMinimum { value: v, argmin: z, truncated: false };
        }
    }
    best
}

/// p-adic profile with `|x|_p = p^{-v_p(x)}`; a pairing that vanishes modulo
/// `p^K` is charged `p^{-K}` and flagged as truncated.
pub fn diophantine_profile_padic(w: &[PadicTruncated], l: f64, bound: u64) -> DiophantineMinimum {
    assert!(!w.is_empty() && bound >= 1, "need a nonempty vector and a positive bound");
    let p = w[0].prime();
    let k = w.iter().map(|x| x.precision()).min().unwrap();
    let m = p_pow(p, k);
    let mut best = DiophantineMinimum { value: f64::INFINITY, argmin: vec![], truncated: false };
    for z in candidates(w.len(), bound as i64) {
        assert!(w.iter().all(|x| x.prime() == p), "all entries must share a prime");
        let dot: BigInt = z.iter().zip(w).map(|(&a, x)| BigInt::from(a) * x.residue()).sum::<BigInt>().mod_floor(&m);
        let (v, truncated) = match vp_int(&dot, p) {
            Some(v) => (v, false),
            None => (k, true),
        };
        let norm = z.iter().map(|x| x.abs()).max().unwrap() as f64;
        let value = (p as f64).powi(-(v as i32)) * norm.powf(l);
        if value < best.value {
            best = DiophantineMinimum { value, argmin: z, truncated };
        }
    }
    best
}
