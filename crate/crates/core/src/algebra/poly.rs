use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{IntMatrix, QMatrix};
use super::AlgebraError;

/// Univariate polynomial over ℚ; coefficients ascending by degree with no
/// trailing zeros (the zero polynomial has no coefficients).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_ints<T: Into<BigInt> + Copy>(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Self {
        Self::new(coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(1, BigRational::one())
    }

    pub fn monomial(deg: usize, c: BigRational) -> Self {
        let mut v = vec![BigRational::zero(); deg + 1];
        v[deg] = c;
        Self::new(v)
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut v = vec![BigRational::zero(); n + 1];
        v[0] = -BigRational::one();
        v[n] = BigRational::one();
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.is_integral().then(|| self.coeffs.iter().map(|c| c.to_integer()).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        Self::new(self.coeffs.iter().map(|c| c / &lc).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Primitive integer polynomial with positive leading coefficient on the
    /// same ℚ-line (denominators cleared, content removed).
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let den = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints.last().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
        ints.into_iter().map(|c| c / &g * &sign).collect()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Evaluates at a square rational matrix (Horner).
    pub fn eval_matrix(&self, m: &QMatrix) -> QMatrix {
        let n = m.n_rows();
        let mut acc = QMatrix::from_fn(n, n, |_, _| BigRational::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m).add(&QMatrix::identity(n).scale(c));
        }
        acc
    }

    /// Evaluates an integer polynomial at an integer matrix. Panics if a
    /// coefficient is not integral.
    pub fn eval_int_matrix(&self, m: &IntMatrix) -> IntMatrix {
        let n = m.dim();
        let mut acc = IntMatrix::zero(n);
        for c in self.coeffs.iter().rev() {
            assert!(c.is_integer(), "non-integral coefficient");
            acc = acc.mul(m).add(&IntMatrix::scalar(n, c.to_integer()));
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Euclidean division; panics on division by zero.
    pub fn div_rem(&self, divisor: &RationalPoly) -> (RationalPoly, RationalPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree().unwrap();
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem(&self, divisor: &RationalPoly) -> RationalPoly {
        self.div_rem(divisor).1
    }

    pub fn divides(&self, other: &RationalPoly) -> bool {
        other.rem(self).is_zero()
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Square-free decomposition over ℚ (Yun): `self = c · ∏ fᵢ^i` with each
    /// `fᵢ` monic, square-free, pairwise coprime. Entries with `fᵢ = 1` are
    /// omitted.
    pub fn square_free_decomposition(&self) -> Vec<(RationalPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = gcd_nonzero(&f, &fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let a = gcd_nonzero(&b, &d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Product of the distinct monic irreducible factors.
    pub fn square_free_part(&self) -> RationalPoly {
        self.square_free_decomposition()
            .into_iter()
            .fold(Self::one(), |acc, (f, _)| &acc * &f)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Monic gcd; at least one of the inputs must be nonzero.
fn gcd_nonzero(f: &RationalPoly, g: &RationalPoly) -> RationalPoly {
    let (mut a, mut b) = (f.clone(), g.clone());
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    a.monic()
}

/// Monic greatest common divisor over ℚ.
pub fn poly_gcd(f: &RationalPoly, g: &RationalPoly) -> Result<RationalPoly, AlgebraError> {
    if f.is_zero() && g.is_zero() {
        return Err(AlgebraError::BothZero);
    }
    Ok(gcd_nonzero(f, g))
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || !abs.is_one();
            if show_coeff {
                if abs.is_integer() {
                    write!(f, "{}", abs)?;
                } else {
                    write!(f, "({})", abs)?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
