//! Exact scalar fields and the small amount of dense linear algebra the
//! crate needs over them (row reduction, rank, kernels, solving).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// An exact commutative field.
pub trait Field: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` only for zero.
    fn inv(&self) -> Option<Self>;
    fn from_rational(q: &BigRational) -> Self;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

/// Element `a + b·√d` of the quadratic field ℚ(√d), `d` a fixed non-square.
///
/// Used where eigenvectors of integer 2×2 blocks are needed exactly
/// (e.g. tagging Lyapunov subspaces of hyperbolic automorphisms).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quadratic {
    pub a: BigRational,
    pub b: BigRational,
    pub d: i64,
}

impl Quadratic {
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Self {
        Quadratic { a, b, d }
    }

    pub fn rational(a: BigRational, d: i64) -> Self {
        Quadratic { a, b: <BigRational as Field>::zero(), d }
    }

    /// `√d` itself.
    pub fn sqrt(d: i64) -> Self {
        Quadratic { a: <BigRational as Field>::zero(), b: <BigRational as Field>::one(), d }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    fn same_field(&self, other: &Self) -> i64 {
        // Pure rationals (b = 0) are compatible with every field; the
        // zero/one constructors carry d = 0.
        if self.d == 0 {
            other.d
        } else {
            debug_assert!(other.d == 0 || other.d == self.d, "mixing quadratic fields");
            self.d
        }
    }
}

impl Field for Quadratic {
    fn zero() -> Self {
        Quadratic { a: <BigRational as Field>::zero(), b: <BigRational as Field>::zero(), d: 0 }
    }
    fn one() -> Self {
        Quadratic { a: <BigRational as Field>::one(), b: <BigRational as Field>::zero(), d: 0 }
    }
    fn is_zero(&self) -> bool {
        Field::is_zero(&self.a) && Field::is_zero(&self.b)
    }
    fn add(&self, o: &Self) -> Self {
        Quadratic { a: &self.a + &o.a, b: &self.b + &o.b, d: self.same_field(o) }
    }
    fn sub(&self, o: &Self) -> Self {
        Quadratic { a: &self.a - &o.a, b: &self.b - &o.b, d: self.same_field(o) }
    }
    fn mul(&self, o: &Self) -> Self {
        let d = self.same_field(o);
        let dq = BigRational::from_integer(BigInt::from(d));
        Quadratic {
            a: &self.a * &o.a + &self.b * &o.b * dq,
            b: &self.a * &o.b + &self.b * &o.a,
            d,
        }
    }
    fn neg(&self) -> Self {
        Quadratic { a: -&self.a, b: -&self.b, d: self.d }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let dq = BigRational::from_integer(BigInt::from(self.d));
        let norm = &self.a * &self.a - &self.b * &self.b * dq;
        // norm ≠ 0 because d is not a square
        Some(Quadratic { a: &self.a / &norm, b: -&self.b / &norm, d: self.d })
    }
    fn from_rational(q: &BigRational) -> Self {
        Quadratic { a: q.clone(), b: <BigRational as Field>::zero(), d: 0 }
    }
}

impl PartialOrd for Quadratic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<F: Field>(rows: &mut [Vec<F>]) -> Vec<usize> {
    let n_rows = rows.len();
    if n_rows == 0 {
        return Vec::new();
    }
    let n_cols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(sel) = (r..n_rows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for x in rows[r].iter_mut() {
            *x = x.mul(&inv);
        }
        for i in 0..n_rows {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in 0..n_cols {
                    let t = factor.mul(&rows[r][j]);
                    rows[i][j] = rows[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of the right kernel `{x : M x = 0}` of an `r × c` matrix.
pub fn kernel<F: Field>(rows: &[Vec<F>], n_cols: usize) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..n_cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); n_cols];
            v[f] = F::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = m[i][f].neg();
            }
            v
        })
        .collect()
}

/// Whether `v` lies in the span of `basis` (vectors given as rows).
pub fn in_span<F: Field>(basis: &[Vec<F>], v: &[F]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    let r = rank(basis);
    let mut ext = basis.to_vec();
    ext.push(v.to_vec());
    rank(&ext) == r
}

/// Solves `M x = b` for square invertible `M`; `None` if singular.
pub fn solve<F: Field>(m: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let n = m.len();
    let mut aug: Vec<Vec<F>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}
