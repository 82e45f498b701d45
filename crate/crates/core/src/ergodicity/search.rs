use num_integer::Integer;
use rayon::prelude::*;

use super::{has_rank_one_factor, is_ergodic_rational, ErgodicityCertificate, ErgodicityError};
use crate::algebra::IntMatrix;
use crate::spectra::ActionSpec;

/// At most this many partner directions `b` are certified before giving up.
const MAX_PARTNERS: usize = 48;

/// Nonzero vectors of `[-B, B]^k` ordered by sup norm, then number of
/// nonzero entries, then lexicographically descending.
pub fn search_order(k: usize, bound: u64) -> Vec<Vec<i64>> {
    let mut out = box_vectors(k, bound as i64);
    out.retain(|v| v.iter().any(|&x| x != 0));
    out.sort_by(|a, b| {
        let key = |v: &Vec<i64>| (v.iter().map(|x| x.abs()).max().unwrap(), v.iter().filter(|&&x| x != 0).count());
        key(a).cmp(&key(b)).then_with(|| b.cmp(a))
    });
    out
}

fn box_vectors(k: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|v| (-b..=b).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Primitive vectors of the box whose first nonzero entry is positive (one
/// per `±v` pair), lexicographically ascending.
fn primitive_directions(k: usize, b: i64) -> Vec<Vec<i64>> {
    box_vectors(k, b)
        .into_iter()
        .filter(|v| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
        .filter(|v| v.iter().fold(0i64, |g, x| g.gcd(x)) == 1)
        .collect()
}

/// First `a` in [`search_order`] with `ρ(a)` ergodic.
pub fn ergodic_element(action: &ActionSpec, bound: u64) -> Result<(Vec<i64>, ErgodicityCertificate), ErgodicityError> {
    search_order(action.rank(), bound)
        .into_par_iter()
        .map(|a| {
            let c = is_ergodic_rational(&action.element(&a));
            (a, c)
        })
        .find_first(|(_, c)| c.is_ergodic())
        .ok_or(ErgodicityError::NotFound(bound))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonErgodicTriple {
    pub exponents: Vec<i64>,
    pub certificate: ErgodicityCertificate,
}

/// Primitive `(k, l, m)` in the box with `A^k B^l C^m` not ergodic, after
/// checking that every nontrivial `A^i B^j` in the box is ergodic.
pub fn non_ergodic_primitive_triples(
    a: &IntMatrix,
    b: &IntMatrix,
    c: &IntMatrix,
    bound: u64,
) -> Result<Vec<NonErgodicTriple>, ErgodicityError> {
    let action = ActionSpec::new(vec![a.clone(), b.clone(), c.clone()], None)?;
    let bi = bound as i64;
    let pairs: Vec<(i64, i64)> =
        (-bi..=bi).flat_map(|i| (-bi..=bi).map(move |j| (i, j))).filter(|&(i, j)| i != 0 || j != 0).collect();
    if let Some((i, j)) = pairs.into_par_iter().find_first(|&(i, j)| !is_ergodic_rational(&action.element(&[i, j, 0])).is_ergodic()) {
        return Err(ErgodicityError::HypothesisViolated(i, j));
    }
    Ok(primitive_directions(3, bi)
        .into_par_iter()
        .filter_map(|e| {
            let certificate = is_ergodic_rational(&action.element(&e));
            (!certificate.is_ergodic()).then_some(NonErgodicTriple { exponents: e, certificate })
        })
        .collect())
}

/// A certified ergodic ℤ² subgroup `Σ = ℤa + ℤb`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicZ2 {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub bound: u64,
    /// Number of primitive `(s, t)` whose element `ρ(sa + tb)` was certified.
    pub certified: usize,
}

fn combine(s: i64, t: i64, a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| s * x + t * y).collect()
}

fn independent(a: &[i64], b: &[i64]) -> bool {
    (0..a.len()).any(|i| (i + 1..a.len()).any(|j| a[i] * b[j] != a[j] * b[i]))
}

/// Searches for `(a, b)` spanning a rank-two sublattice on which every
/// primitive element up to `bound` acts ergodically.
///
/// A nontrivial kernel of the action (some primitive `v` with `ρ(v) = I`)
/// is reported as `NoErgodicSubgroupFound` with the kernel vectors as
/// obstructions, before the rank-one check. An ergodic element `a` is fixed
/// first, then partners `b` are tried in [`search_order`].
pub fn ergodic_z2_subgroup(action: &ActionSpec, bound: u64) -> Result<ErgodicZ2, ErgodicityError> {
    let k = action.rank();
    let bi = bound as i64;
    let kernel: Vec<Vec<i64>> = primitive_directions(k, bi)
        .into_par_iter()
        .filter(|v| action.element(v).is_identity())
        .collect();
    if !kernel.is_empty() || k < 2 {
        return Err(ErgodicityError::NoErgodicSubgroupFound { bound, obstructions: kernel });
    }
    let verdict = has_rank_one_factor(action)?;
    if let Some(block) = verdict.offending_block {
        return Err(ErgodicityError::RankOneFactor { block, rank: verdict.block_ranks[block] });
    }
    let (a, _) = ergodic_element(action, bound)?;
    let directions = primitive_directions(2, bi);
    let mut obstructions: Vec<Vec<i64>> = Vec::new();
    for b in search_order(k, bound).into_iter().filter(|b| independent(&a, b)).take(MAX_PARTNERS) {
        let bad: Vec<Vec<i64>> = directions
            .par_iter()
            .map(|st| combine(st[0], st[1], &a, &b))
            .filter(|v| !is_ergodic_rational(&action.element(v)).is_ergodic())
            .collect();
        if bad.is_empty() {
            return Ok(ErgodicZ2 { a, b, bound, certified: directions.len() });
        }
        for v in bad {
            if !obstructions.contains(&v) {
                obstructions.push(v);
            }
        }
    }
    Err(ErgodicityError::NoErgodicSubgroupFound { bound, obstructions })
}
