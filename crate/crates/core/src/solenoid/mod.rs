//! S-adic solenoids of tori: points and the extended ℤ^k dynamics, the dual
//! group ℤ[1/n]^d, exact and Monte Carlo correlations, decay-rate fits and a
//! central limit check.

mod mixing;
mod montecarlo;
mod point;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::modp::prime_divisors;
use crate::algebra::{IntMatrix, QMatrix};
use crate::spectra::SpectraError;

pub use mixing::{
    exact_curve, fit_curve, fit_decay, mixing_curve, mode_escape_time, write_curve_csv, CurveEntry, CurveMethod, MixingCurve,
    MixingFit,
};
pub use montecarlo::{
    clt_check, monte_carlo_correlation, monte_carlo_curve, CltReport, HistogramBin, McConfig, McEstimate,
};
pub use point::{haar_sample, solenoid_apply, solenoid_apply_inverse, SolenoidPoint, HAAR_GRID_BITS};

/// Exact complex rational.
pub type ExactComplex = Complex<BigRational>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolenoidError {
    #[error("dual vector has a denominator divisible by {prime}, which is not in S")]
    LeavesDualLattice { prime: u64 },
    #[error("fewer than two nonzero correlations ({usable}) to fit a decay rate")]
    DegenerateFit { usable: usize },
    #[error("p = {prime}: {needed} digits needed but only {available} retained")]
    PrecisionExhausted { prime: u64, needed: u32, available: u32 },
    #[error("the map is not ergodic (cyclotomic factor Φ_{cyclotomic_index})")]
    NonErgodic { cyclotomic_index: u64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point primes {point:?} do not match the action primes {action:?}")]
    PrimeMismatch { point: Vec<u64>, action: Vec<u64> },
    #[error("p-adic coordinates for {prime} disagree on the prime or the precision")]
    InconsistentPadic { prime: u64 },
    #[error("central limit check needs integer modes")]
    NonIntegerMode,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

fn zero_c() -> ExactComplex {
    Complex::new(BigRational::zero(), BigRational::zero())
}

fn conj(c: &ExactComplex) -> ExactComplex {
    Complex::new(c.re.clone(), -c.im.clone())
}

/// One character `χ_k(z)` of the solenoid, `k ∈ ℤ[1/n]^d`, with a complex
/// coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct DualMode {
    pub vector: Vec<BigRational>,
    pub coeff: ExactComplex,
}

impl DualMode {
    pub fn new(vector: Vec<BigRational>, coeff: ExactComplex) -> Self {
        DualMode { vector, coeff }
    }

    /// Unit coefficient character at an integer vector.
    pub fn integer(k: &[i64]) -> Self {
        DualMode {
            vector: k.iter().map(|&x| BigRational::from_integer(x.into())).collect(),
            coeff: Complex::new(BigRational::one(), BigRational::zero()),
        }
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn is_zero_mode(&self) -> bool {
        self.vector.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.vector.iter().all(|x| x.is_integer())
    }

    /// Checks that every denominator is an S-unit.
    pub fn check_lattice(&self, primes: &[u64]) -> Result<(), SolenoidError> {
        for x in &self.vector {
            if let Some(p) = outside_prime(x.denom(), primes) {
                return Err(SolenoidError::LeavesDualLattice { prime: p });
            }
        }
        Ok(())
    }

    fn sup_norm(&self) -> f64 {
        self.vector.iter().map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }
}

/// Smallest prime factor of `n` outside `primes`, if any.
fn outside_prime(n: &BigInt, primes: &[u64]) -> Option<u64> {
    let mut m = n.abs();
    for &p in primes {
        let pb = BigInt::from(p);
        while (&m % &pb).is_zero() {
            m /= &pb;
        }
    }
    if m.is_one() {
        None
    } else {
        prime_divisors(&m).into_iter().min()
    }
}

/// `Aᵀ·m` over ℚ; the result must stay in ℤ[1/n]^d.
pub fn dual_action(a: &IntMatrix, m: &DualMode, primes: &[u64]) -> Result<DualMode, SolenoidError> {
    dual_action_rational(&a.to_rational(), m, primes)
}

/// [`dual_action`] for rational matrices such as inverses, which may
/// introduce denominators.
pub fn dual_action_rational(a: &QMatrix, m: &DualMode, primes: &[u64]) -> Result<DualMode, SolenoidError> {
    if a.n_rows() != m.dim() {
        return Err(SolenoidError::DimensionMismatch { expected: a.n_rows(), found: m.dim() });
    }
    m.check_lattice(primes)?;
    let out = DualMode { vector: a.transpose().mul_vec(&m.vector), coeff: m.coeff.clone() };
    out.check_lattice(primes)?;
    Ok(out)
}

/// A finite trigonometric polynomial `Σ c_k χ_k` on the solenoid.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigFunction {
    dim: usize,
    modes: Vec<DualMode>,
}

impl TrigFunction {
    /// Merges repeated vectors and drops zero coefficients; mode order is
    /// the order of first appearance.
    pub fn new(dim: usize, modes: Vec<DualMode>) -> Result<Self, SolenoidError> {
        let mut order: Vec<Vec<BigRational>> = Vec::new();
        let mut acc: HashMap<Vec<BigRational>, ExactComplex> = HashMap::new();
        for m in modes {
            if m.dim() != dim {
                return Err(SolenoidError::DimensionMismatch { expected: dim, found: m.dim() });
            }
            match acc.get_mut(&m.vector) {
                Some(c) => *c = c.clone() + m.coeff,
                None => {
                    order.push(m.vector.clone());
                    acc.insert(m.vector, m.coeff);
                }
            }
        }
        let modes = order
            .into_iter()
            .filter_map(|v| {
                let c = acc.remove(&v).expect("present");
                (!c.is_zero()).then_some(DualMode { vector: v, coeff: c })
            })
            .collect();
        Ok(TrigFunction { dim, modes })
    }

    pub fn character(k: &[i64]) -> Self {
        TrigFunction { dim: k.len(), modes: vec![DualMode::integer(k)] }
    }

    pub fn constant(dim: usize, c: ExactComplex) -> Self {
        TrigFunction::new(dim, vec![DualMode { vector: vec![BigRational::zero(); dim], coeff: c }]).expect("dims agree")
    }

    /// `amplitude·cos 2π⟨k, x⟩`.
    pub fn cosine(k: &[i64], amplitude: BigRational) -> Self {
        let half = Complex::new(amplitude / BigRational::from_integer(2.into()), BigRational::zero());
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        let mut a = DualMode::integer(k);
        let mut b = DualMode::integer(&neg);
        a.coeff = half.clone();
        b.coeff = half;
        TrigFunction::new(k.len(), vec![a, b]).expect("dims agree")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[DualMode] {
        &self.modes
    }

    /// `z ↦ conj f(z)`: negated vectors with conjugated coefficients.
    pub fn conjugate(&self) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| DualMode { vector: m.vector.iter().map(|x| -x).collect(), coeff: conj(&m.coeff) })
            .collect();
        TrigFunction::new(self.dim, modes).expect("dims agree")
    }

    /// `true` when the coefficients are conjugate symmetric.
    pub fn is_real(&self) -> bool {
        let c = self.conjugate();
        self.modes.len() == c.modes.len() && self.modes.iter().all(|m| c.modes.contains(m))
    }

    /// Coefficient of the zero mode, the Haar mean.
    pub fn mean(&self) -> ExactComplex {
        self.modes.iter().find(|m| m.is_zero_mode()).map(|m| m.coeff.clone()).unwrap_or_else(zero_c)
    }

    /// Hölder-norm surrogate `Σ |c_k|·(1 + ‖k‖∞)^θ`.
    pub fn holder_norm(&self, theta: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let re = m.coeff.re.to_f64().unwrap_or(0.0);
                let im = m.coeff.im.to_f64().unwrap_or(0.0);
                re.hypot(im) * (1.0 + m.sup_norm()).powf(theta)
            })
            .sum()
    }

    pub fn check_lattice(&self, primes: &[u64]) -> Result<(), SolenoidError> {
        self.modes.iter().try_for_each(|m| m.check_lattice(primes))
    }
}

/// Checks that `S` covers `det A` and every mode of `f` and `g`.
fn check_setting(f: &TrigFunction, g: &TrigFunction, a: &IntMatrix, primes: &[u64]) -> Result<(), SolenoidError> {
    for h in [f, g] {
        if h.dim() != a.dim() {
            return Err(SolenoidError::DimensionMismatch { expected: a.dim(), found: h.dim() });
        }
        h.check_lattice(primes)?;
    }
    if let Some(p) = outside_prime(&a.det(), primes) {
        return Err(SolenoidError::LeavesDualLattice { prime: p });
    }
    Ok(())
}

/// `∫ f(Aⁿz)·g(z) dμ − ∫f dμ·∫g dμ` by orthogonality of characters: the sum
/// of `c_k·d_m` over pairs with `(Aᵀ)ⁿk + m = 0`, minus the product of means.
///
/// The pairing is bilinear; pass `g.conjugate()` for the Hermitian inner
/// product.
pub fn exact_correlation(
    f: &TrigFunction,
    g: &TrigFunction,
    a: &IntMatrix,
    n: u64,
    primes: &[u64],
) -> Result<ExactComplex, SolenoidError> {
    check_setting(f, g, a, primes)?;
    Ok(correlation_with_power(f, g, &a.pow(n).transpose().to_rational()))
}

fn correlation_with_power(f: &TrigFunction, g: &TrigFunction, at_n: &QMatrix) -> ExactComplex {
    let targets: HashMap<Vec<BigRational>, &ExactComplex> =
        g.modes.iter().map(|m| (m.vector.iter().map(|x| -x).collect(), &m.coeff)).collect();
    let mut sum = zero_c();
    for m in &f.modes {
        let image = at_n.mul_vec(&m.vector);
        if let Some(d) = targets.get(&image) {
            sum = sum + m.coeff.clone() * (*d).clone();
        }
    }
    sum - f.mean() * g.mean()
}
