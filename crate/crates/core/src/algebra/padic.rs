//! Truncated p-adic integers: elements of ℤ/p^Kℤ that remember `p` and `K`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::AlgebraError;

/// p-adic valuation of a truncated value. A zero residue only tells us the
/// valuation is at least the precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(u32),
    AtLeast(u32),
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// Lower bound on the true valuation.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }
}

/// `p^k` as a big integer.
pub fn p_pow(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn vp_int(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp_rational(x: &BigRational, p: u64) -> Option<i64> {
    let num = vp_int(x.numer(), p)?;
    let den = vp_int(x.denom(), p).expect("denominator is nonzero");
    Some(num as i64 - den as i64)
}

/// Inverse of a unit modulo `m` (`None` if not invertible).
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Image of a p-integral rational in ℤ/p^kℤ.
pub fn rational_mod_pk(q: &BigRational, p: u64, k: u32) -> Option<BigInt> {
    let m = p_pow(p, k);
    let inv = mod_inverse(q.denom(), &m)?;
    Some((q.numer() * inv).mod_floor(&m))
}

/// An element of ℤ_p known modulo `p^precision`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicTruncated {
    p: u64,
    precision: u32,
    residue: BigInt,
}

impl PadicTruncated {
    /// Reduces `value` into `[0, p^precision)`.
    pub fn new(p: u64, precision: u32, value: impl Into<BigInt>) -> Self {
        assert!(p >= 2, "p must be at least 2");
        assert!(precision >= 1, "precision must be positive");
        let residue = value.into().mod_floor(&p_pow(p, precision));
        PadicTruncated { p, precision, residue }
    }

    pub fn zero(p: u64, precision: u32) -> Self {
        Self::new(p, precision, 0)
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::new(p, precision, 1)
    }

    /// Embeds a rational whose denominator is a p-adic unit.
    pub fn from_rational(q: &BigRational, p: u64, precision: u32) -> Result<Self, AlgebraError> {
        let residue = rational_mod_pk(q, p, precision).ok_or(AlgebraError::NotPIntegral { p })?;
        Ok(PadicTruncated { p, precision, residue })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> BigInt {
        p_pow(self.p, self.precision)
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        match vp_int(&self.residue, self.p) {
            Some(v) if v < self.precision => Valuation::Finite(v),
            _ => Valuation::AtLeast(self.precision),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// Same value known to fewer digits.
    pub fn truncate(&self, precision: u32) -> Self {
        assert!(precision <= self.precision);
        Self::new(self.p, precision, self.residue.clone())
    }

    /// Base-p digits, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let p = BigInt::from(self.p);
        let mut r = self.residue.clone();
        (0..self.precision)
            .map(|_| {
                let (q, d) = r.div_rem(&p);
                r = q;
                d.try_into().unwrap_or(0)
            })
            .collect()
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.p != other.p {
            return Err(AlgebraError::PrimeMismatch(self.p, other.p));
        }
        if self.precision != other.precision {
            return Err(AlgebraError::PrecisionMismatch(self.precision, other.precision));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(Self::new(self.p, self.precision, &self.residue + &other.residue))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(Self::new(self.p, self.precision, &self.residue - &other.residue))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(Self::new(self.p, self.precision, &self.residue * &other.residue))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.precision, -&self.residue)
    }

    pub fn invert(&self) -> Result<Self, AlgebraError> {
        if !self.is_unit() {
            return Err(AlgebraError::NonUnitInverse { p: self.p });
        }
        let inv = mod_inverse(&self.residue, &self.modulus()).expect("units are invertible");
        Ok(Self::new(self.p, self.precision, inv))
    }

    /// Symmetric representative in `(-p^K/2, p^K/2]`.
    pub fn symmetric(&self) -> BigInt {
        let m = self.modulus();
        let half = &m >> 1usize;
        if self.residue > half {
            &self.residue - m
        } else {
            self.residue.clone()
        }
    }

    pub fn is_negative_repr(&self) -> bool {
        self.symmetric().is_negative()
    }
}

impl fmt::Debug for PadicTruncated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.p, self.precision)
    }
}

impl fmt::Display for PadicTruncated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
