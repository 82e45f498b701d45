//! Polynomials over the prime field 𝔽_p and their factorization.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::RationalPoly;
use super::AlgebraError;

/// Fixed seed for equal-degree splitting, so factor order is reproducible.
const SPLIT_SEED: u64 = 0x5eed_f00d;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes in increasing order starting at 2.
pub fn primes() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&n| is_prime(n))
}

/// Distinct prime divisors of a nonzero integer, ascending.
pub fn prime_divisors(n: &BigInt) -> Vec<u64> {
    let mut m = num_traits::Signed::abs(n);
    let mut out = Vec::new();
    if m.is_zero() {
        return out;
    }
    let mut p = 2u64;
    while BigInt::from(p) * BigInt::from(p) <= m {
        let bp = BigInt::from(p);
        if (&m % &bp).is_zero() {
            out.push(p);
            while (&m % &bp).is_zero() {
                m /= &bp;
            }
        }
        p += 1;
    }
    if m > BigInt::one() {
        out.push(m.to_u64().expect("prime factor fits in u64"));
    }
    out
}

/// Polynomial over 𝔽_p, ascending coefficients in `[0, p)`, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut c: Vec<u64> = coeffs.into_iter().map(|x| x % p).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, coeffs: c }
    }

    pub fn from_i64(p: u64, coeffs: &[i64]) -> Self {
        Self::new(p, coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
    }

    pub fn from_bigints(p: u64, coeffs: &[BigInt]) -> Self {
        let bp = BigInt::from(p);
        Self::new(p, coeffs.iter().map(|c| c.mod_floor(&bp).to_u64().unwrap()).collect())
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        Self::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn inv(&self, a: u64) -> u64 {
        let e = BigInt::from(a).extended_gcd(&BigInt::from(self.p));
        assert!(e.gcd.is_one(), "{a} is not invertible mod {}", self.p);
        e.x.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }

    pub fn scale(&self, c: u64) -> Self {
        Self::new(self.p, self.coeffs.iter().map(|&a| self.mulm(a, c)).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.inv(self.leading()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.p, (0..n).map(|i| (self.coeff(i) + o.coeff(i)) % self.p).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.p, (0..n).map(|i| (self.coeff(i) + self.p - o.coeff(i)) % self.p).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let mut out = vec![0u128; self.coeffs.len() + o.coeffs.len() - 1];
        let p = self.p as u128;
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a as u128 * b as u128) % p;
            }
        }
        Self::new(self.p, out.into_iter().map(|c| c as u64).collect())
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.deg0();
        let inv = self.inv(d.leading());
        let mut r = self.coeffs.clone();
        if r.len() < d.coeffs.len() {
            return (Self::zero(self.p), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = self.mulm(r[i + dd], inv);
            q[i] = c;
            if c != 0 {
                for (j, &b) in d.coeffs.iter().enumerate() {
                    let t = self.mulm(c, b);
                    r[i + j] = (r[i + j] + self.p - t) % self.p;
                }
            }
        }
        r.truncate(dd);
        (Self::new(self.p, q), Self::new(self.p, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    /// Monic gcd (zero only if both inputs are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·o = g`, `g` monic.
    pub fn ext_gcd(&self, o: &Self) -> (Self, Self, Self) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Self::one(p), Self::zero(p));
        let (mut t0, mut t1) = (Self::zero(p), Self::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let c = self.inv(r0.leading());
        (r0.scale(c), s0.scale(c), t0.scale(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| self.mulm(c, (i as u64) % self.p))
                .collect(),
        )
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, e: &BigUint, m: &Self) -> Self {
        let mut result = Self::one(self.p).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            result = result.mul(&result).rem(m);
            if e.bit(i) {
                result = result.mul(&base).rem(m);
            }
        }
        result
    }

    /// For `f(x) = g(x^p)` returns `g` (coefficients are fixed by Frobenius
    /// on 𝔽_p).
    fn pth_root(&self) -> Self {
        let p = self.p as usize;
        Self::new(self.p, self.coeffs.iter().step_by(p).copied().collect())
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (self.mulm(acc, x) + c) % self.p)
    }

    pub fn to_bigints(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(|&c| BigInt::from(c)).collect()
    }
}

impl fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 (mod {})", self.p);
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".into(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        write!(f, "{} (mod {})", terms.join(" + "), self.p)
    }
}

/// Reduces an integer-coefficient polynomial mod p.
pub fn reduce_mod_p(f: &RationalPoly, p: u64) -> Result<FpPoly, AlgebraError> {
    let c = f.integer_coeffs().ok_or(AlgebraError::NotIntegral)?;
    Ok(FpPoly::from_bigints(p, &c))
}

/// Factorization of an integer polynomial mod `p` into monic irreducible
/// factors with multiplicities. The product of the factors (with
/// multiplicity) times the leading coefficient is `f mod p`.
pub fn factor_mod_p(f: &RationalPoly, p: u64) -> Result<Vec<(FpPoly, usize)>, AlgebraError> {
    if f.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let fp = reduce_mod_p(f, p)?;
    if fp.degree() != f.degree() {
        return Err(AlgebraError::LeadingCoeffVanishes { p });
    }
    Ok(factor_fp(&fp))
}

/// Factors a nonzero polynomial over 𝔽_p (monic factors, sorted).
pub fn factor_fp(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut out = Vec::new();
    for (g, mult) in square_free_fp(&f.monic()) {
        for (h, d) in distinct_degree(&g) {
            for irr in equal_degree(&h, d, &mut rng) {
                out.push((irr, mult));
            }
        }
    }
    out.sort_by(|(a, ma), (b, mb)| {
        a.degree().cmp(&b.degree()).then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev())).then(ma.cmp(mb))
    });
    out
}

/// Square-free factorization over 𝔽_p (monic input).
fn square_free_fp(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let mut out = Vec::new();
    if f.deg0() == 0 {
        return out;
    }
    let d = f.derivative();
    if d.is_zero() {
        for (g, m) in square_free_fp(&f.pth_root()) {
            out.push((g, m * p as usize));
        }
        return out;
    }
    let mut c = f.gcd(&d);
    let mut w = f.div_rem(&c).0;
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.div_rem(&y).0;
        if z.deg0() > 0 {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.div_rem(&w).0;
    }
    if c.deg0() > 0 {
        for (g, m) in square_free_fp(&c.monic().pth_root()) {
            out.push((g, m * p as usize));
        }
    }
    out
}

/// Splits a square-free monic polynomial into products of irreducibles of
/// equal degree `d`, returning `(product, d)`.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.rem(&rest);
    let mut i = 1;
    let pe = BigUint::from(p);
    while rest.deg0() >= 2 * i {
        h = h.pow_mod(&pe, &rest);
        let g = rest.gcd(&h.sub(&x));
        if !g.is_one() {
            out.push((g.clone(), i));
            rest = rest.div_rem(&g).0;
            h = h.rem(&rest);
        }
        i += 1;
    }
    if rest.deg0() > 0 {
        let d = rest.deg0();
        out.push((rest.monic(), d));
    }
    out
}

/// Cantor–Zassenhaus splitting of a product of distinct degree-`d`
/// irreducibles.
fn equal_degree(f: &FpPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
    let n = f.deg0();
    if n == d {
        return vec![f.monic()];
    }
    let p = f.p;
    loop {
        let a = FpPoly::new(p, (0..n).map(|_| rng.random_range(0..p)).collect());
        if a.deg0() == 0 {
            continue;
        }
        let b = if p == 2 {
            // absolute trace from F_{2^d} to F_2
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(f);
                acc = acc.add(&t);
            }
            acc
        } else {
            let e = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
            a.pow_mod(&e, f).sub(&FpPoly::one(p))
        };
        let g = f.gcd(&b);
        if g.deg0() > 0 && g.deg0() < n {
            let h = f.div_rem(&g).0;
            let mut out = equal_degree(&g, d, rng);
            out.extend(equal_degree(&h, d, rng));
            return out;
        }
    }
}
