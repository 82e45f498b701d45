//! Characteristic polynomials by the Faddeev–LeVerrier recurrence.
//!
//! Over ℤ every division in the recurrence is exact, so the integer variant
//! never leaves the integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::matrix::{IntMatrix, QMatrix};
use super::poly::RationalPoly;

/// `det(xI − A)`: monic, integer coefficients, degree `dim`.
pub fn charpoly(a: &IntMatrix) -> RationalPoly {
    let n = a.dim();
    // coeffs[k] is the coefficient of x^k
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::zero(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        m = a.mul(&m).add(&IntMatrix::scalar(n, coeffs[n - k + 1].clone()));
        let am = a.mul(&m);
        let tr = am.trace();
        let c = -tr / BigInt::from(k);
        coeffs[n - k] = c;
    }
    RationalPoly::from_bigints(&coeffs)
}

/// `det(xI − A)` for a rational square matrix.
pub fn charpoly_rational(a: &QMatrix) -> RationalPoly {
    assert!(a.is_square());
    let n = a.n_rows();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m = QMatrix::from_fn(n, n, |_, _| BigRational::zero());
    for k in 1..=n {
        m = a.mul(&m).add(&QMatrix::identity(n).scale(&coeffs[n - k + 1]));
        let am = a.mul(&m);
        let tr: BigRational = (0..n).map(|i| am[(i, i)].clone()).sum();
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    RationalPoly::new(coeffs)
}
