//! Exact computations for commuting integer-matrix actions on tori,
//! nilmanifolds and their S-adic solenoids.

pub mod algebra;
pub mod conjugacy;
pub mod ergodicity;
pub mod nilpotent;
pub mod solenoid;
pub mod spectra;

pub use algebra::{
    charpoly, cyclotomic, factor_mod_p, hensel_lift, newton_polygon, poly_gcd, AlgebraError, IntMatrix,
    NewtonPolygon, PadicTruncated, QMatrix, RationalPoly, Valuation,
};
