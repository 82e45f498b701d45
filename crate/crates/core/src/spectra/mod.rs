//! Lyapunov functionals of ℤ^k actions by commuting integer matrices, at the
//! real place and at finitely many primes.

mod action;
mod chambers;
mod diophantine;
mod padic;
mod real;

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::algebra::AlgebraError;

pub use action::ActionSpec;
pub use chambers::{expanding_elements, min_expansion_rate, sign_vector, weyl_chambers, ChamberRestriction, WeylChamber};
pub use diophantine::{diophantine_profile, diophantine_profile_padic, DiophantineMinimum};
pub use padic::{padic_joint, padic_lyapunov, PadicExponent, DEFAULT_PRECISION, MAX_PRECISION};
pub use real::{complex_roots, real_joint, real_lyapunov};

/// Default relative tolerance for grouping real exponents.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("an action needs at least one generator")]
    EmptyAction,
    #[error("generator {0} has dimension {1}, expected {2}")]
    DimensionMismatch(usize, usize, usize),
    #[error("generator {0} is singular")]
    SingularGenerator(usize),
    #[error("generators {0} and {1} do not commute")]
    CommutativityViolated(usize, usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} divides a generator determinant but is missing from S")]
    MissingPrime(u64),
    #[error("polynomial root iteration did not converge")]
    RootFindingFailure,
    #[error("numerical rank of a spectral projector is ambiguous")]
    IllConditioned,
    #[error("p-adic precision {0} is insufficient to separate slope subspaces")]
    PrecisionExhausted(u32),
    #[error("all Lyapunov functionals vanish")]
    RankDeficient,
    #[error("operation is implemented for rank 2 only (got rank {0})")]
    UnsupportedRank(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// A joint Lyapunov functional: `values[i] = χ(e_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovFunctional {
    pub place: Place,
    pub values: Vec<f64>,
    pub multiplicity: usize,
    /// For p-adic places, the exact root valuations `s_i` with
    /// `values[i] = −s_i·log p`.
    pub slopes: Option<Vec<Ratio<i64>>>,
}

impl LyapunovFunctional {
    pub fn eval(&self, a: &[i64]) -> f64 {
        self.values.iter().zip(a).map(|(v, &x)| v * x as f64).sum()
    }

    pub fn eval_real(&self, a: &[f64]) -> f64 {
        self.values.iter().zip(a).map(|(v, x)| v * x).sum()
    }

    /// Exact valuation sum `Σ a_i s_i` for p-adic functionals.
    pub fn exact_slope(&self, a: &[i64]) -> Option<Ratio<i64>> {
        self.slopes.as_ref().map(|s| s.iter().zip(a).map(|(s, &x)| s * x).sum())
    }

    /// Sign of `χ(a)`; exact at p-adic places, within `tol·‖a‖` at the real
    /// place.
    pub fn sign_at(&self, a: &[i64], tol: f64) -> i8 {
        if let Some(s) = self.exact_slope(a) {
            // χ = −slope·log p
            return match s.cmp(&Ratio::from_integer(0)) {
                std::cmp::Ordering::Less => 1,
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Greater => -1,
            };
        }
        let norm = a.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64;
        let v = self.eval(a);
        if v.abs() <= tol * norm.max(1.0) * self.scale() {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }

    fn scale(&self) -> f64 {
        self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        match &self.slopes {
            Some(s) => s.iter().all(|x| *x == Ratio::from_integer(0)),
            None => self.values.iter().all(|v| v.abs() <= tol),
        }
    }
}

/// Functionals of all places together with their coarse classes and, for
/// rank two, the Weyl chambers.
#[derive(Clone, Debug)]
pub struct LyapunovSpectrum {
    pub rank: usize,
    pub dim: usize,
    pub functionals: Vec<LyapunovFunctional>,
    /// Positive-proportionality classes, as index lists into `functionals`.
    pub classes: Vec<Vec<usize>>,
    /// Chambers over all places; empty unless the rank is 2 and some
    /// functional is nonzero.
    pub chambers: Vec<WeylChamber>,
    pub tol: f64,
}

impl LyapunovSpectrum {
    /// Assembles a spectrum from functionals (classes and chambers derived).
    pub fn from_functionals(rank: usize, dim: usize, functionals: Vec<LyapunovFunctional>, tol: f64) -> Self {
        let classes = coarse_classes(&functionals, tol);
        let mut s = LyapunovSpectrum { rank, dim, functionals, classes, chambers: Vec::new(), tol };
        if rank == 2 {
            s.chambers = weyl_chambers(&s, ChamberRestriction::AllPlaces).unwrap_or_default();
        }
        s
    }

    pub fn at_place(&self, place: Place) -> impl Iterator<Item = &LyapunovFunctional> {
        self.functionals.iter().filter(move |f| f.place == place)
    }

    pub fn places(&self) -> Vec<Place> {
        let mut p: Vec<Place> = self.functionals.iter().map(|f| f.place).collect();
        p.sort();
        p.dedup();
        p
    }

    /// `Σ multiplicity·χ(a)` over one place.
    pub fn weighted_sum(&self, place: Place, a: &[i64]) -> f64 {
        self.at_place(place).map(|f| f.multiplicity as f64 * f.eval(a)).sum()
    }

    /// Exact `Σ multiplicity·Σ a_i s_i` at a prime.
    pub fn weighted_slope_sum(&self, p: u64, a: &[i64]) -> Ratio<i64> {
        self.at_place(Place::Prime(p))
            .map(|f| f.exact_slope(a).unwrap() * f.multiplicity as i64)
            .sum()
    }
}

/// Joint spectrum over the real place and every prime of the action's `S`.
pub fn joint_spectrum(action: &ActionSpec, tol: f64) -> Result<LyapunovSpectrum, SpectraError> {
    let k = action.rank();
    let mut functionals = Vec::new();
    for (values, multiplicity) in real_joint(action.generators(), tol)? {
        functionals.push(LyapunovFunctional { place: Place::Real, values, multiplicity, slopes: None });
    }
    for &p in action.primes() {
        let lp = (p as f64).ln();
        for (slopes, multiplicity) in padic_joint(action.generators(), p)? {
            let values = slopes.iter().map(|s| -ratio_f64(s) * lp).collect();
            functionals.push(LyapunovFunctional { place: Place::Prime(p), values, multiplicity, slopes: Some(slopes) });
        }
    }
    Ok(LyapunovSpectrum::from_functionals(k, action.dim(), functionals, tol))
}

pub(crate) fn ratio_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Partition into positive-proportionality classes. Pairs of p-adic
/// functionals are compared exactly through their slopes; any pair involving
/// a real functional within `tol`. All zero functionals form one class.
pub fn coarse_classes(functionals: &[LyapunovFunctional], tol: f64) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut zero_class: Vec<usize> = Vec::new();
    for (i, f) in functionals.iter().enumerate() {
        if f.is_zero(tol) {
            zero_class.push(i);
            continue;
        }
        match classes.iter_mut().find(|c| positively_proportional(&functionals[c[0]], f, tol)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    if !zero_class.is_empty() {
        classes.push(zero_class);
    }
    classes
}

fn positively_proportional(f: &LyapunovFunctional, g: &LyapunovFunctional, tol: f64) -> bool {
    if let (Some(a), Some(b)) = (&f.slopes, &g.slopes) {
        // values = −s·log p, so compare slope vectors directly
        let dot: Ratio<i64> = a.iter().zip(b).map(|(x, y)| x * y).sum();
        if dot <= Ratio::from_integer(0) {
            return false;
        }
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if a[i] * b[j] != a[j] * b[i] {
                    return false;
                }
            }
        }
        return true;
    }
    let (a, b) = (&f.values, &g.values);
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    if dot <= 0.0 {
        return false;
    }
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if (a[i] * b[j] - a[j] * b[i]).abs() > tol.max(1e-12) * na * nb * 10.0 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::IntMatrix;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn real(values: &[f64]) -> LyapunovFunctional {
        LyapunovFunctional { place: Place::Real, values: values.to_vec(), multiplicity: 1, slopes: None }
    }

    #[test]
    fn coarse_class_examples() {
        assert_eq!(coarse_classes(&[real(&[1.0, 2.0]), real(&[2.0, 4.0])], 1e-8).len(), 1);
        assert_eq!(coarse_classes(&[real(&[1.0, 0.0]), real(&[-1.0, 0.0])], 1e-8).len(), 2);
        assert_eq!(coarse_classes(&[real(&[1.0, 1.0]), real(&[1.0, -1.0]), real(&[-1.0, -1.0])], 1e-8).len(), 3);
    }

    #[test]
    fn padic_pairs_are_compared_exactly() {
        let p = |s: &[(i64, i64)], prime: u64| {
            let slopes: Vec<Ratio<i64>> = s.iter().map(|&(n, d)| Ratio::new(n, d)).collect();
            let lp = (prime as f64).ln();
            LyapunovFunctional {
                place: Place::Prime(prime),
                values: slopes.iter().map(|x| -ratio_f64(x) * lp).collect(),
                multiplicity: 1,
                slopes: Some(slopes),
            }
        };
        let f = vec![p(&[(1, 3), (2, 3)], 2), p(&[(1, 1), (2, 1)], 3), p(&[(1, 3), (2, 3) ], 5), p(&[(-1, 1), (-2, 1)], 2)];
        let classes = coarse_classes(&f, 1e-8);
        assert_eq!(classes, vec![vec![0, 1, 2], vec![3]]);
    }

    fn action(rows: &[&[Vec<i64>]]) -> ActionSpec {
        ActionSpec::new(rows.iter().map(|r| IntMatrix::from_rows(r)).collect(), None).unwrap()
    }

    #[test]
    fn diagonal_joint_spectrum() {
        let s = joint_spectrum(&action(&[&[vec![2, 0], vec![0, 3]], &[vec![3, 0], vec![0, 2]]]), DEFAULT_TOL).unwrap();
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        let mut real: Vec<Vec<f64>> = s.at_place(Place::Real).map(|f| f.values.clone()).collect();
        real.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((real[0][0] - l2).abs() < 1e-9 && (real[0][1] - l3).abs() < 1e-9);
        assert!((real[1][0] - l3).abs() < 1e-9 && (real[1][1] - l2).abs() < 1e-9);
        assert_eq!(s.places(), vec![Place::Real, Place::Prime(2), Place::Prime(3)]);
        assert_eq!(s.chambers.len(), 8);
    }

    #[test]
    fn golden_pair() {
        let s = joint_spectrum(&action(&[&[vec![2, 1], vec![1, 1]], &[vec![1, 1], vec![1, 0]]]), DEFAULT_TOL).unwrap();
        let l = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert_eq!(s.functionals.len(), 2);
        for f in &s.functionals {
            assert!((f.values[0].abs() - 2.0 * l).abs() < 1e-9);
            assert!((f.values[0] - 2.0 * f.values[1]).abs() < 1e-9);
        }
        assert_eq!(s.classes.len(), 2);
    }

    fn commuting_pair() -> impl Strategy<Value = (IntMatrix, IntMatrix, u64)> {
        (proptest::collection::vec(-3i64..=3, 9), (-2i64..=2, -2i64..=2), (-2i64..=2, -2i64..=2), 1u64..=3)
            .prop_map(|(e, (a0, a1), (b0, b1), m)| {
                let base = IntMatrix::from_rows(&e.chunks(3).map(|c| c.to_vec()).collect::<Vec<_>>());
                let lin = |c0: i64, c1: i64| IntMatrix::scalar(3, c0.into()).add(&base.scale(&c1.into()));
                (lin(a0, a1), lin(b0, b1), m)
            })
            .prop_filter("nonsingular", |(a, b, _)| !a.det().is_zero() && !b.det().is_zero())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn product_formula_and_multiplicities((a, b, _) in commuting_pair()) {
            let act = ActionSpec::new(vec![a, b], None).unwrap();
            let s = joint_spectrum(&act, DEFAULT_TOL).unwrap();
            for place in s.places() {
                prop_assert_eq!(s.at_place(place).map(|f| f.multiplicity).sum::<usize>(), 3);
            }
            for x in -3i64..=3 {
                for y in -3i64..=3 {
                    let total: f64 = s.places().iter().map(|&pl| s.weighted_sum(pl, &[x, y])).sum();
                    prop_assert!(total.abs() < 1e-9 * 3.0 * (1.0 + (x.abs() + y.abs()) as f64), "sum {} at {:?}", total, (x, y));
                    let det = act.element(&[x, y]).det();
                    for &p in act.primes() {
                        let v = crate::algebra::padic::vp_rational(&det, p).unwrap();
                        prop_assert_eq!(s.weighted_slope_sum(p, &[x, y]), Ratio::from_integer(v));
                    }
                }
            }
        }

        #[test]
        fn powers_scale_functionals((a, _, m) in commuting_pair()) {
            let b = a.pow(m);
            let s = joint_spectrum(&ActionSpec::new(vec![a, b], None).unwrap(), DEFAULT_TOL).unwrap();
            for f in &s.functionals {
                match &f.slopes {
                    Some(sl) => prop_assert_eq!(sl[1], sl[0] * m as i64),
                    None => prop_assert!((f.values[1] - m as f64 * f.values[0]).abs() < 1e-6 * (1.0 + f.values[1].abs())),
                }
            }
        }
    }
}
