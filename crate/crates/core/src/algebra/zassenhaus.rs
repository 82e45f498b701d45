//! Factorization over ℚ: square-free decomposition, a good prime, Hensel
//! lifting past the coefficient bound, then subset recombination.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::hensel::{hensel_lift_zp, ZpPoly};
use super::modp::{factor_fp, primes, FpPoly};
use super::padic::{mod_inverse, p_pow};
use super::poly::RationalPoly;
use super::AlgebraError;

/// Number of admissible primes tried; the one with fewest modular factors wins.
const PRIMES_TRIED: usize = 3;
/// Beyond this many modular factors subset recombination is refused.
const MAX_MODULAR_FACTORS: usize = 16;

/// Monic irreducible factors over ℚ with multiplicities, sorted by degree
/// and then by coefficients.
pub fn factor_over_q(f: &RationalPoly) -> Result<Vec<(RationalPoly, usize)>, AlgebraError> {
    if f.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let mut out = Vec::new();
    for (g, mult) in f.square_free_decomposition() {
        for h in factor_square_free(&g)? {
            out.push((h, mult));
        }
    }
    out.sort_by(|(a, ma), (b, mb)| {
        a.degree().cmp(&b.degree()).then_with(|| a.coeffs().iter().rev().cmp(b.coeffs().iter().rev())).then(ma.cmp(mb))
    });
    Ok(out)
}

/// Factors a square-free polynomial into monic irreducibles over ℚ.
fn factor_square_free(g: &RationalPoly) -> Result<Vec<RationalPoly>, AlgebraError> {
    let n = g.degree().unwrap_or(0);
    if n <= 1 {
        return Ok(if n == 1 { vec![g.monic()] } else { vec![] });
    }
    let big = g.primitive_integer();
    let lc = big.last().unwrap().clone();
    let deriv = RationalPoly::from_bigints(&big).derivative();
    let deriv_int = deriv.integer_coeffs().expect("derivative of integer polynomial");

    // admissible primes: leading coefficient a unit and square-free reduction
    let mut best: Option<(u64, Vec<FpPoly>)> = None;
    let mut tried = 0;
    for p in primes().take(200) {
        if (&lc % BigInt::from(p)).is_zero() {
            continue;
        }
        let gp = FpPoly::from_bigints(p, &big);
        if !gp.gcd(&FpPoly::from_bigints(p, &deriv_int)).is_one() {
            continue;
        }
        let factors: Vec<FpPoly> = factor_fp(&gp).into_iter().map(|(h, _)| h).collect();
        if factors.len() == 1 {
            return Ok(vec![g.monic()]);
        }
        if best.as_ref().is_none_or(|(_, b)| factors.len() < b.len()) {
            best = Some((p, factors));
        }
        tried += 1;
        if tried == PRIMES_TRIED {
            break;
        }
    }
    let (p, modular) = best.ok_or(AlgebraError::FactorSearchInconclusive)?;
    if modular.len() > MAX_MODULAR_FACTORS {
        return Err(AlgebraError::FactorSearchInconclusive);
    }

    // coefficient bound for any factor, times the leading coefficient
    let max_coef = big.iter().map(|c| c.abs()).max().unwrap();
    let bound = (BigInt::one() << n) * BigInt::from(n + 1) * &max_coef * lc.abs();
    let mut k = 1;
    while p_pow(p, k) <= &bound * 2 {
        k += 1;
    }
    let modulus = p_pow(p, k);
    let inv_lc = mod_inverse(&lc, &modulus).expect("lc is a unit mod p");
    let monic_lift = ZpPoly::new(p, k, big.clone()).scale(&inv_lc);
    let mut lifted = hensel_lift_zp(&monic_lift, &modular)?;

    let mut remaining = big;
    let mut out = Vec::new();
    let mut s = 1;
    'outer: while 2 * s <= lifted.len() {
        for subset in combinations(lifted.len(), s) {
            let lc_rem = remaining.last().unwrap().clone();
            let cand = subset
                .iter()
                .fold(ZpPoly::new(p, k, vec![lc_rem.clone()]), |acc, &i| acc.mul(&lifted[i]));
            let cand = RationalPoly::from_bigints(&cand.symmetric_coeffs());
            let prim = RationalPoly::from_bigints(&cand.primitive_integer());
            let rem_poly = RationalPoly::from_bigints(&remaining);
            let (q, r) = rem_poly.div_rem(&prim);
            if r.is_zero() && q.is_integral() {
                out.push(prim.monic());
                remaining = q.integer_coeffs().unwrap();
                let keep: Vec<ZpPoly> = lifted
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, f)| f.clone())
                    .collect();
                lifted = keep;
                continue 'outer;
            }
        }
        s += 1;
    }
    let last = RationalPoly::from_bigints(&remaining);
    if last.degree().unwrap_or(0) > 0 {
        out.push(last.monic());
    }
    debug_assert_eq!(
        out.iter().fold(RationalPoly::one(), |acc, f| &acc * f),
        g.monic(),
        "recombined factors must multiply back"
    );
    Ok(out)
}

/// All `s`-element subsets of `0..n` in lexicographic order.
fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    rec(0, n, s, &mut cur, &mut out);
    out
}

impl RationalPoly {
    /// Whether the polynomial is irreducible over ℚ (constants are not).
    pub fn is_irreducible(&self) -> Result<bool, AlgebraError> {
        if self.degree().unwrap_or(0) == 0 {
            return Ok(false);
        }
        let f = factor_over_q(self)?;
        Ok(f.len() == 1 && f[0].1 == 1)
    }
}
