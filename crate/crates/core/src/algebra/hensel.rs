//! Polynomials over ℤ/p^Kℤ and linear Hensel lifting of coprime
//! factorizations.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::modp::FpPoly;
use super::padic::{mod_inverse, p_pow};
use super::poly::RationalPoly;
use super::AlgebraError;

/// Polynomial with coefficients in ℤ/p^Kℤ, ascending, reduced to `[0, p^K)`,
/// no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZpPoly {
    p: u64,
    precision: u32,
    coeffs: Vec<BigInt>,
}

impl ZpPoly {
    pub fn new(p: u64, precision: u32, coeffs: Vec<BigInt>) -> Self {
        let m = p_pow(p, precision);
        let mut c: Vec<BigInt> = coeffs.into_iter().map(|x| x.mod_floor(&m)).collect();
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        ZpPoly { p, precision, coeffs: c }
    }

    pub fn from_rational(f: &RationalPoly, p: u64, precision: u32) -> Result<Self, AlgebraError> {
        let c = f
            .coeffs()
            .iter()
            .map(|q| super::padic::rational_mod_pk(q, p, precision).ok_or(AlgebraError::NotPIntegral { p }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(p, precision, c))
    }

    pub fn from_fp(f: &FpPoly, precision: u32) -> Self {
        Self::new(f.prime(), precision, f.to_bigints())
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::new(p, precision, vec![BigInt::one()])
    }

    pub fn x_pow(p: u64, precision: u32, n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        Self::new(p, precision, c)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> BigInt {
        p_pow(self.p, self.precision)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn reduce(&self, precision: u32) -> Self {
        Self::new(self.p, precision, self.coeffs.clone())
    }

    pub fn to_fp(&self) -> FpPoly {
        FpPoly::from_bigints(self.p, &self.coeffs)
    }

    /// Coefficients lifted to the symmetric range `(-p^K/2, p^K/2]`.
    pub fn symmetric_coeffs(&self) -> Vec<BigInt> {
        let m = self.modulus();
        let half = &m >> 1usize;
        self.coeffs.iter().map(|c| if c > &half { c - &m } else { c.clone() }).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.p, self.precision, (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.p, self.precision, (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.p, self.precision, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::new(self.p, self.precision, vec![]);
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(self.p, self.precision, out)
    }

    /// Division by a monic polynomial.
    pub fn div_rem_monic(&self, d: &Self) -> (Self, Self) {
        assert!(d.is_monic(), "divisor must be monic");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::new(self.p, self.precision, vec![]), self.clone());
        }
        let m = self.modulus();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = r[i + dd].mod_floor(&m);
            if !c.is_zero() {
                for (j, b) in d.coeffs.iter().enumerate() {
                    r[i + j] = (&r[i + j] - &c * b).mod_floor(&m);
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Self::new(self.p, self.precision, q), Self::new(self.p, self.precision, r))
    }

    /// Exact division of every coefficient by `p^j`, landing in precision
    /// `K − j`. Fails if some coefficient is not divisible.
    pub fn divide_by_p_pow(&self, j: u32) -> Option<Self> {
        let pj = p_pow(self.p, j);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(&pj);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(Self::new(self.p, self.precision - j, out))
    }
}

impl fmt::Debug for ZpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}] (mod {}^{})", c.join(", "), self.p, self.precision)
    }
}

/// Lifts a factorization `f ≡ lc(f)·∏ gᵢ (mod p)` into pairwise coprime monic
/// factors to monic factors modulo `p^K` whose product is `lc(f)⁻¹·f mod p^K`.
pub fn hensel_lift(f: &RationalPoly, factors: &[FpPoly], k: u32) -> Result<Vec<ZpPoly>, AlgebraError> {
    let p = factors.first().map(FpPoly::prime).ok_or(AlgebraError::FactorMismatch)?;
    if f.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let fz = ZpPoly::from_rational(f, p, k)?;
    let lc = f.leading();
    let lc_mod = super::padic::rational_mod_pk(&lc, p, k).ok_or(AlgebraError::NotPIntegral { p })?;
    let inv = mod_inverse(&lc_mod, &fz.modulus()).ok_or(AlgebraError::LeadingCoeffVanishes { p })?;
    hensel_lift_zp(&fz.scale(&inv), factors)
}

/// Hensel lifting for a monic polynomial already given modulo `p^K`.
pub fn hensel_lift_zp(f: &ZpPoly, factors: &[FpPoly]) -> Result<Vec<ZpPoly>, AlgebraError> {
    let p = f.prime();
    let k = f.precision();
    if !f.is_monic() {
        return Err(AlgebraError::LeadingCoeffVanishes { p });
    }
    for g in factors {
        if g.prime() != p {
            return Err(AlgebraError::PrimeMismatch(p, g.prime()));
        }
        if g.leading() != 1 {
            return Err(AlgebraError::FactorMismatch);
        }
    }
    for (i, a) in factors.iter().enumerate() {
        for b in &factors[i + 1..] {
            if !a.gcd(b).is_one() {
                return Err(AlgebraError::NotCoprime);
            }
        }
    }
    let prod = factors.iter().fold(FpPoly::one(p), |acc, g| acc.mul(g));
    if prod != f.to_fp() {
        return Err(AlgebraError::FactorMismatch);
    }
    let mut out = Vec::with_capacity(factors.len());
    let mut rest = f.clone();
    for (i, g) in factors.iter().enumerate() {
        if i + 1 == factors.len() {
            out.push(rest.clone());
            break;
        }
        let h = factors[i + 1..].iter().fold(FpPoly::one(p), |acc, g| acc.mul(g));
        let (gl, hl) = lift_pair(&rest, g, &h, k);
        out.push(gl);
        rest = hl;
    }
    Ok(out)
}

/// Lifts `f ≡ g·h (mod p)` to `f ≡ G·H (mod p^K)`, digit by digit.
fn lift_pair(f: &ZpPoly, g: &FpPoly, h: &FpPoly, k: u32) -> (ZpPoly, ZpPoly) {
    let p = f.prime();
    let (one, s, t) = g.ext_gcd(h);
    debug_assert!(one.is_one());
    let mut gl = ZpPoly::from_fp(g, k);
    let mut hl = ZpPoly::from_fp(h, k);
    for j in 1..k {
        let err = f.sub(&gl.mul(&hl));
        let e = err.divide_by_p_pow(j).expect("factorization holds mod p^j").to_fp();
        if e.is_zero() {
            continue;
        }
        // τ h + σ g = e with deg τ < deg g, deg σ < deg h
        let (q, tau) = e.mul(&t).div_rem(g);
        let sigma = e.mul(&s).add(&q.mul(h));
        let pj = p_pow(p, j);
        gl = gl.add(&ZpPoly::from_fp(&tau, k).scale(&pj));
        hl = hl.add(&ZpPoly::from_fp(&sigma, k).scale(&pj));
    }
    (gl, hl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zp(p: u64, k: u32, c: &[i64]) -> ZpPoly {
        ZpPoly::new(p, k, c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn lift_square_root_of_minus_one_mod_25() {
        let f = RationalPoly::from_ints(&[1, 0, 1]);
        let lifted = hensel_lift(&f, &[FpPoly::from_i64(5, &[-2, 1]), FpPoly::from_i64(5, &[2, 1])], 2).unwrap();
        assert_eq!(lifted, vec![zp(5, 2, &[-7, 1]), zp(5, 2, &[7, 1])]);
    }

    #[test]
    fn precision_one_is_unchanged() {
        let f = RationalPoly::from_ints(&[1, 0, 1]);
        let g = vec![FpPoly::from_i64(5, &[-2, 1]), FpPoly::from_i64(5, &[2, 1])];
        let lifted = hensel_lift(&f, &g, 1).unwrap();
        assert_eq!(lifted.iter().map(ZpPoly::to_fp).collect::<Vec<_>>(), g);
    }

    #[test]
    fn repeated_factor_is_not_coprime() {
        let f = RationalPoly::from_ints(&[1, 2, 1]);
        let g = FpPoly::from_i64(2, &[1, 1]);
        assert!(matches!(hensel_lift(&f, &[g.clone(), g], 4), Err(AlgebraError::NotCoprime)));
    }

    #[test]
    fn wrong_factors_are_rejected() {
        let f = RationalPoly::from_ints(&[1, 0, 1]);
        let g = vec![FpPoly::from_i64(5, &[-1, 1]), FpPoly::from_i64(5, &[1, 1])];
        assert!(matches!(hensel_lift(&f, &g, 3), Err(AlgebraError::FactorMismatch)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip(p in prop::sample::select(vec![2u64, 3, 5, 7]), k in 1u32..=12,
                      roots in proptest::collection::vec(-20i64..20, 2..5),
                      quad in proptest::option::of((-9i64..9, -9i64..9))) {
            // product of linear factors with distinct roots mod p, maybe times a quadratic
            let mut seen = std::collections::BTreeSet::new();
            let mut lin: Vec<i64> = Vec::new();
            for r in roots {
                if seen.insert(r.rem_euclid(p as i64)) {
                    lin.push(r);
                }
            }
            let mut mod_factors: Vec<FpPoly> = lin.iter().map(|&r| FpPoly::from_i64(p, &[-r, 1])).collect();
            let mut f = lin.iter().fold(RationalPoly::one(), |acc, &r| &acc * &RationalPoly::from_ints(&[-r, 1]));
            if let Some((b, c)) = quad {
                let q = FpPoly::from_i64(p, &[c, b, 1]);
                if mod_factors.iter().all(|g| q.gcd(g).is_one()) && q.degree() == Some(2)
                    && crate::algebra::modp::factor_fp(&q).len() == 1 && crate::algebra::modp::factor_fp(&q)[0].1 == 1 {
                    mod_factors.push(q);
                    f = &f * &RationalPoly::from_ints(&[c, b, 1]);
                }
            }
            let lifted = hensel_lift(&f, &mod_factors, k).unwrap();
            let prod = lifted.iter().fold(ZpPoly::one(p, k), |acc, g| acc.mul(g));
            prop_assert_eq!(prod, ZpPoly::from_rational(&f, p, k).unwrap());
            for (l, g) in lifted.iter().zip(&mod_factors) {
                prop_assert_eq!(&l.to_fp(), g);
                prop_assert!(l.is_monic());
            }
        }
    }
}
