//! Exact arithmetic over ℤ, ℚ, 𝔽_p and truncated ℤ_p.

pub mod charpoly;
pub mod cyclotomic;
pub mod field;
pub mod hensel;
pub mod lattice;
pub mod matrix;
pub mod modp;
pub mod newton;
pub mod padic;
pub mod poly;
pub mod zassenhaus;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("gcd of two zero polynomials is undefined")]
    BothZero,
    #[error("the zero polynomial has no Newton polygon or factorization")]
    ZeroPolynomial,
    #[error("leading coefficient vanishes mod {p}")]
    LeadingCoeffVanishes { p: u64 },
    #[error("modular factors are not pairwise coprime; group repeated factors first")]
    NotCoprime,
    #[error("modular factors do not multiply to the input polynomial")]
    FactorMismatch,
    #[error("polynomial has non-integer coefficients")]
    NotIntegral,
    #[error("value is not {p}-integral")]
    NotPIntegral { p: u64 },
    #[error("only units can be inverted in Z_{p}")]
    NonUnitInverse { p: u64 },
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("operands carry different precisions ({0} and {1})")]
    PrecisionMismatch(u32, u32),
    #[error("p-adic precision exhausted")]
    PrecisionExhausted,
    #[error("bounded factor search was inconclusive")]
    FactorSearchInconclusive,
}

pub use charpoly::{charpoly, charpoly_rational};
pub use cyclotomic::{cyclotomic, cyclotomic_indices_up_to_degree, euler_phi};
pub use field::{Field, Quadratic};
pub use hensel::{hensel_lift, hensel_lift_zp, ZpPoly};
pub use lattice::{hnf_with_transform, saturate};
pub use matrix::{primitive_integer_vector, IntMatrix, QMatrix};
pub use modp::{factor_mod_p, is_prime, prime_divisors, FpPoly};
pub use newton::{newton_polygon, newton_polygon_truncated, NewtonPolygon};
pub use padic::{PadicTruncated, Valuation};
pub use poly::{poly_gcd, RationalPoly};
pub use zassenhaus::factor_over_q;
