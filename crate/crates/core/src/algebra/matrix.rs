use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field;

/// Square matrix with exact integer entries, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    /// Panics if the rows are ragged or not square.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let dim = rows.len();
        assert!(dim > 0, "empty matrix");
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            entries.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix { dim, entries }
    }

    pub fn try_from_rows(rows: &[Vec<i64>]) -> Option<Self> {
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return None;
        }
        Some(Self::from_rows(rows))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        IntMatrix { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, BigInt::one())
    }

    pub fn zero(dim: usize) -> Self {
        Self::scalar(dim, BigInt::zero())
    }

    pub fn scalar(dim: usize, c: BigInt) -> Self {
        Self::from_fn(dim, |i, j| if i == j { c.clone() } else { BigInt::zero() })
    }

    pub fn diag(values: &[i64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i].into() } else { BigInt::zero() })
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.dim + other.dim;
        Self::from_fn(n, |i, j| {
            if i < self.dim && j < self.dim {
                self[(i, j)].clone()
            } else if i >= self.dim && j >= self.dim {
                other[(i - self.dim, j - self.dim)].clone()
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)].clone())
    }

    pub fn trace(&self) -> BigInt {
        (0..self.dim).map(|i| &self[(i, i)]).sum()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        Self::from_fn(n, |i, j| {
            let mut s = BigInt::zero();
            for k in 0..n {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    s += a * &other[(k, j)];
                }
            }
            s
        })
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        Self::from_fn(self.dim, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        Self::from_fn(self.dim, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        Self::from_fn(self.dim, |i, j| &self[(i, j)] * c)
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn commutes_with(&self, other: &IntMatrix) -> bool {
        self.mul(other) == other.mul(self)
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> BigInt {
        let n = self.dim;
        let mut m: Vec<Vec<BigInt>> = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * &m[n - 1][n - 1]
    }

    /// Adjugate matrix: `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> IntMatrix {
        let n = self.dim;
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, |i, j| {
            // cofactor C_{ji}
            let minor = IntMatrix::from_fn(n - 1, |r, c| {
                let rr = if r < j { r } else { r + 1 };
                let cc = if c < i { c } else { c + 1 };
                self[(rr, cc)].clone()
            });
            let d = minor.det();
            if (i + j) % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    pub fn to_rational(&self) -> QMatrix {
        QMatrix::from_fn(self.dim, self.dim, |i, j| BigRational::from_integer(self[(i, j)].clone()))
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> BigInt {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<BigInt>())
            .max()
            .unwrap_or_default()
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.dim + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Dense rational matrix, not necessarily square (bases are stored as
/// `n × r` matrices whose columns are the basis vectors).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl QMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        QMatrix { rows, cols, entries }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let entries: Vec<BigRational> = rows.into_iter().flatten().collect();
        assert_eq!(entries.len(), r * c, "ragged rows");
        QMatrix { rows: r, cols: c, entries }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<BigRational>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { BigRational::one() } else { BigRational::zero() })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigRational> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigRational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut s = BigRational::zero();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    s += a * &other[(k, j)];
                }
            }
            s
        })
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn scale(&self, c: &BigRational) -> QMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * c)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn det(&self) -> BigRational {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.row_vecs();
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
                return BigRational::zero();
            };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            let piv = m[c][c].clone();
            det *= &piv;
            for i in c + 1..n {
                if m[i][c].is_zero() {
                    continue;
                }
                let f = &m[i][c] / &piv;
                for j in c..n {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut r = self.row_vec(i);
                r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
                r
            })
            .collect();
        let piv = field::rref(&mut aug);
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| aug[i][n + j].clone()))
    }

    pub fn pow(&self, e: u64) -> QMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn rank(&self) -> usize {
        field::rank(&self.row_vecs())
    }

    /// Columns form a basis of the right kernel.
    pub fn kernel(&self) -> QMatrix {
        let k = field::kernel(&self.row_vecs(), self.cols);
        if k.is_empty() {
            return QMatrix { rows: self.cols, cols: 0, entries: Vec::new() };
        }
        Self::from_columns(&k)
    }

    /// Solves `self · X = rhs` for full-column-rank `self` when a solution
    /// exists; `None` otherwise.
    pub fn solve_right(&self, rhs: &QMatrix) -> Option<QMatrix> {
        // Row-reduce [self | rhs]; pivots must hit every column of self.
        let n = self.cols;
        let mut aug: Vec<Vec<BigRational>> = (0..self.rows)
            .map(|i| {
                let mut r = self.row_vec(i);
                r.extend(rhs.row_vec(i));
                r
            })
            .collect();
        let piv = field::rref(&mut aug);
        if piv.iter().filter(|&&p| p < n).count() != n || piv.iter().any(|&p| p >= n) {
            return None;
        }
        Some(Self::from_fn(n, rhs.cols, |i, j| aug[i][n + j].clone()))
    }

    /// Integer matrix and positive denominator with `self = num / den`.
    pub fn to_integer_scaled(&self) -> (IntMatrix, BigInt) {
        assert!(self.is_square());
        let den = self.entries.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let num = IntMatrix::from_fn(self.rows, |i, j| (&self[(i, j)] * BigRational::from_integer(den.clone())).to_integer());
        (num, den)
    }

    pub fn to_int_matrix(&self) -> Option<IntMatrix> {
        if !self.is_square() || !self.entries.iter().all(|x| x.is_integer()) {
            return None;
        }
        Some(IntMatrix::from_fn(self.rows, |i, j| self[(i, j)].to_integer()))
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    /// Concatenate columns.
    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Row-major integer rows as a rational matrix.
pub fn qmatrix_from_int_rows(rows: &[Vec<BigInt>]) -> QMatrix {
    QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect())
}
