use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::point::{haar_sample, PreparedMode, SolenoidPoint};
use super::{exact_curve, mode_escape_time, SolenoidError, TrigFunction};
use crate::algebra::modp::prime_divisors;
use crate::algebra::IntMatrix;
use crate::ergodicity::is_ergodic;
use crate::spectra::ActionSpec;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// p-adic digits drawn per coordinate.
    pub precision: u32,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 10_000, seed: 0, precision: 12 }
    }
}

/// Empirical correlation with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

struct Evaluator {
    modes: Vec<(PreparedMode, Complex64)>,
}

impl Evaluator {
    fn new(f: &TrigFunction, primes: &[u64]) -> Result<Self, SolenoidError> {
        let modes = f
            .modes()
            .iter()
            .map(|m| {
                let c = Complex64::new(m.coeff.re.to_f64().unwrap_or(0.0), m.coeff.im.to_f64().unwrap_or(0.0));
                Ok((PreparedMode::new(m, primes)?, c))
            })
            .collect::<Result<_, SolenoidError>>()?;
        Ok(Evaluator { modes })
    }

    fn eval(&self, z: &SolenoidPoint) -> Result<Complex64, SolenoidError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.modes {
            acc += c * Complex64::cis(TAU * m.phase_f64(z)?);
        }
        Ok(acc)
    }
}

/// `mean((F − F̄)(G − Ḡ))` with the standard error of the mean.
fn covariance(fs: &[Complex64], gs: &[Complex64]) -> McEstimate {
    let n = fs.len() as f64;
    let fbar = fs.iter().sum::<Complex64>() / n;
    let gbar = gs.iter().sum::<Complex64>() / n;
    let ys: Vec<Complex64> = fs.iter().zip(gs).map(|(f, g)| (f - fbar) * (g - gbar)).collect();
    let ybar = ys.iter().sum::<Complex64>() / n;
    let var = if fs.len() > 1 { ys.iter().map(|y| (y - ybar).norm_sqr()).sum::<f64>() / (n - 1.0) } else { 0.0 };
    McEstimate { value: ybar, stderr: (var / n).sqrt(), samples: fs.len() }
}

fn check_functions(f: &TrigFunction, g: &TrigFunction, action: &ActionSpec) -> Result<(), SolenoidError> {
    for h in [f, g] {
        if h.dim() != action.dim() {
            return Err(SolenoidError::DimensionMismatch { expected: action.dim(), found: h.dim() });
        }
    }
    Ok(())
}

/// Empirical `∫ f(ρ(a)z)·g(z) dμ − ∫f·∫g` over Haar samples; the pairing is
/// bilinear as in [`super::exact_correlation`].
pub fn monte_carlo_correlation(
    f: &TrigFunction,
    g: &TrigFunction,
    action: &ActionSpec,
    a: &[u64],
    config: &McConfig,
) -> Result<McEstimate, SolenoidError> {
    check_functions(f, g, action)?;
    let fe = Evaluator::new(f, action.primes())?;
    let ge = Evaluator::new(g, action.primes())?;
    let m = action.element_nonneg(a);
    let pts = haar_sample(config.seed, action.dim(), action.primes(), config.precision, config.samples);
    let gs: Vec<Complex64> = pts.par_iter().map(|z| ge.eval(z)).collect::<Result<_, _>>()?;
    let fs: Vec<Complex64> = pts.par_iter().map(|z| fe.eval(&z.apply_matrix(&m))).collect::<Result<_, _>>()?;
    Ok(covariance(&fs, &gs))
}

/// Monte Carlo estimates of `C(n)` along `ρ(n·direction)` for
/// `0 ≤ n ≤ n_max`, all from one Haar sample.
pub fn monte_carlo_curve(
    f: &TrigFunction,
    g: &TrigFunction,
    action: &ActionSpec,
    direction: &[u64],
    n_max: u64,
    config: &McConfig,
) -> Result<Vec<(u64, McEstimate)>, SolenoidError> {
    check_functions(f, g, action)?;
    let fe = Evaluator::new(f, action.primes())?;
    let ge = Evaluator::new(g, action.primes())?;
    let m = action.element_nonneg(direction);
    let mut pts = haar_sample(config.seed, action.dim(), action.primes(), config.precision, config.samples);
    let gs: Vec<Complex64> = pts.par_iter().map(|z| ge.eval(z)).collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        if n > 0 {
            pts = pts.par_iter().map(|z| z.apply_matrix(&m)).collect();
        }
        let fs: Vec<Complex64> = pts.par_iter().map(|z| fe.eval(z)).collect::<Result<_, _>>()?;
        out.push((n, covariance(&fs, &gs)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    pub n: u64,
    pub samples: usize,
    /// `Σ_{j∈ℤ} C(|j|)` from exact correlations of `f` with itself.
    pub reference_variance: BigRational,
    /// Correlations vanish exactly from this lag on.
    pub reference_horizon: u64,
    pub empirical_variance: f64,
    pub empirical_mean: f64,
    pub histogram: Vec<HistogramBin>,
}

const CLT_HORIZON: u64 = 256;
const HISTOGRAM_BINS: usize = 20;

/// Central limit check for a real trigonometric polynomial `f` on the
/// torus under an ergodic `A`: the sample variance of `n^{-1/2}·S_n f`
/// over seeded orbits against `σ² = C(0) + 2 Σ_{j≥1} Re C(j)`.
///
/// Orbits start on the dyadic grid `2^{-B}` with `B` large enough that the
/// first `n` iterates keep 64 significant bits, and are computed exactly.
pub fn clt_check(f: &TrigFunction, a: &IntMatrix, n: u64, samples: usize, seed: u64) -> Result<CltReport, SolenoidError> {
    if f.dim() != a.dim() {
        return Err(SolenoidError::DimensionMismatch { expected: a.dim(), found: f.dim() });
    }
    let cert = is_ergodic(a);
    if !cert.is_ergodic() {
        return Err(SolenoidError::NonErgodic { cyclotomic_index: cert.cyclotomic_index.unwrap_or(1) });
    }
    if f.modes().iter().any(|m| !m.is_integral()) {
        return Err(SolenoidError::NonIntegerMode);
    }
    let primes = prime_divisors(&a.det());
    let g = f.conjugate();
    let horizon = mode_escape_time(f, &g, a, &primes, CLT_HORIZON)?.unwrap_or(CLT_HORIZON + 1);
    let curve = exact_curve(f, &g, a, &primes, horizon.saturating_sub(1).min(CLT_HORIZON))?;
    let two = BigRational::from_integer(2.into());
    let reference_variance = curve
        .iter()
        .map(|e| if e.n == 0 { e.value.re.clone() } else { &two * &e.value.re })
        .fold(BigRational::zero(), |acc, x| acc + x);

    let d = a.dim();
    let row_sum = (0..d)
        .map(|i| a.row(i).iter().map(|x| x.magnitude().clone()).sum::<num_bigint::BigUint>())
        .max()
        .expect("nonempty");
    let bits_per_step = row_sum.bits().max(1);
    let bits = 64 + n * bits_per_step;
    let mask = (BigInt::one() << bits) - 1;
    let modes: Vec<(Vec<BigInt>, Complex64)> = f
        .modes()
        .iter()
        .map(|m| {
            (
                m.vector.iter().map(|x| x.to_integer()).collect(),
                Complex64::new(m.coeff.re.to_f64().unwrap_or(0.0), m.coeff.im.to_f64().unwrap_or(0.0)),
            )
        })
        .collect();
    let mean = f.mean().re.to_f64().unwrap_or(0.0);
    let eval = |x: &[BigInt]| -> f64 {
        let mut acc = 0.0;
        for (k, c) in &modes {
            let s: BigInt = k.iter().zip(x).map(|(a, b)| a * b).sum::<BigInt>() & &mask;
            let top = (s >> (bits - 64)).to_u64().unwrap_or(0);
            let t = TAU * (top as f64 / 18446744073709551616.0);
            acc += c.re * t.cos() - c.im * t.sin();
        }
        acc
    };
    let chunk = 64;
    let sums: Vec<f64> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ c as u64);
            let len = chunk.min(samples - c * chunk);
            let eval = &eval;
            let mask = &mask;
            (0..len)
                .map(move |_| {
                    let mut x: Vec<BigInt> = (0..d).map(|_| random_bits(&mut rng, bits)).collect();
                    let mut s = 0.0;
                    for _ in 0..n {
                        s += eval(&x) - mean;
                        x = a.mul_vec(&x).into_iter().map(|v| v & mask).collect();
                    }
                    s / (n as f64).sqrt()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let m = sums.len() as f64;
    let empirical_mean = sums.iter().sum::<f64>() / m;
    let empirical_variance =
        if sums.len() > 1 { sums.iter().map(|s| (s - empirical_mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
    Ok(CltReport {
        n,
        samples,
        reference_variance,
        reference_horizon: horizon,
        empirical_variance,
        empirical_mean,
        histogram: histogram(&sums),
    })
}

fn random_bits(rng: &mut ChaCha8Rng, bits: u64) -> BigInt {
    let words = bits.div_ceil(32) as usize;
    let digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
    let x = BigInt::from_slice(num_bigint::Sign::Plus, &digits);
    x & ((BigInt::one() << bits) - 1)
}

fn histogram(xs: &[f64]) -> Vec<HistogramBin> {
    if xs.is_empty() {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / HISTOGRAM_BINS as f64 } else { 1.0 };
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin { lo: lo + i as f64 * width, hi: lo + (i + 1) as f64 * width, count: 0 })
        .collect();
    for &x in xs {
        let i = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        bins[i].count += 1;
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solenoid::{exact_correlation, ExactComplex};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cat() -> ActionSpec {
        ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])], None).unwrap()
    }

    fn to_c(x: &ExactComplex) -> Complex64 {
        Complex64::new(x.re.to_f64().unwrap(), x.im.to_f64().unwrap())
    }

    #[test]
    fn agrees_with_exact_engine() {
        // mixed modes with ‖k‖∞ ≤ 2
        let modes = vec![
            crate::solenoid::DualMode::integer(&[1, 0]),
            crate::solenoid::DualMode::integer(&[-2, 1]),
            crate::solenoid::DualMode::new(vec![q(2, 1), q(1, 1)], ExactComplex::new(q(1, 2), q(1, 3))),
        ];
        let f = TrigFunction::new(2, modes).unwrap();
        let g = f.conjugate();
        let config = McConfig::default();
        let curve = monte_carlo_curve(&f, &g, &cat(), &[1], 4, &config).unwrap();
        for (n, est) in &curve {
            let exact = to_c(&exact_correlation(&f, &g, cat().generators().first().unwrap(), *n, &[]).unwrap());
            assert!((est.value - exact).norm() <= 4.0 * est.stderr, "n = {n}: {} vs {}", est.value, exact);
        }
        let single = monte_carlo_correlation(&f, &g, &cat(), &[1], &config).unwrap();
        assert_eq!(single, curve[1].1);
    }

    #[test]
    fn constant_function_has_no_correlation() {
        let one = TrigFunction::constant(2, ExactComplex::new(q(1, 1), q(0, 1)));
        let est = monte_carlo_correlation(&one, &TrigFunction::character(&[1, 1]), &cat(), &[2], &McConfig::default()).unwrap();
        assert_eq!((est.value, est.stderr), (Complex64::new(0.0, 0.0), 0.0));
    }

    #[test]
    fn deep_modes_exhaust_precision() {
        let action = ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2]])], Some(vec![2])).unwrap();
        let config = McConfig { samples: 16, seed: 0, precision: 3 };
        let f = TrigFunction::new(
            1,
            vec![crate::solenoid::DualMode::new(vec![q(1, 16)], ExactComplex::new(q(1, 1), q(0, 1)))],
        )
        .unwrap();
        assert_eq!(
            monte_carlo_correlation(&f, &f.conjugate(), &action, &[1], &config),
            Err(SolenoidError::PrecisionExhausted { prime: 2, needed: 4, available: 3 })
        );
        let ok = McConfig { precision: 4, ..config };
        assert!(monte_carlo_correlation(&f, &f.conjugate(), &action, &[1], &ok).is_ok());
    }

    #[test]
    fn padic_modes_agree_with_exact_engine() {
        // χ_{1/4} + χ_{3/2} on the 2-adic solenoid of the doubling map
        let action = ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2]])], Some(vec![2])).unwrap();
        let unit = ExactComplex::new(q(1, 1), q(0, 1));
        let f = TrigFunction::new(
            1,
            vec![crate::solenoid::DualMode::new(vec![q(1, 4)], unit.clone()), crate::solenoid::DualMode::new(vec![q(3, 2)], unit)],
        )
        .unwrap();
        let g = f.conjugate();
        let curve = monte_carlo_curve(&f, &g, &action, &[1], 3, &McConfig::default()).unwrap();
        for (n, est) in &curve {
            let exact = to_c(&exact_correlation(&f, &g, &action.generators()[0], *n, &[2]).unwrap());
            assert!((est.value - exact).norm() <= 4.0 * est.stderr.max(1e-12), "n = {n}");
        }
    }

    #[test]
    fn clt_examples() {
        let doubling = IntMatrix::from_rows(&[vec![2]]);
        let cos = TrigFunction::cosine(&[1], q(1, 1));
        let r = clt_check(&cos, &doubling, 512, 200, 7).unwrap();
        assert_eq!(r.reference_variance, q(1, 2));
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 200);
        assert!((r.empirical_variance - 0.5).abs() < 0.2);

        // cos 2πx − cos 4πx = h − h∘A with h = cos 2πx
        let cob = TrigFunction::new(
            1,
            cos.modes().iter().cloned().chain(TrigFunction::cosine(&[2], q(-1, 1)).modes().iter().cloned()).collect(),
        )
        .unwrap();
        let r = clt_check(&cob, &doubling, 512, 200, 7).unwrap();
        assert!(r.reference_variance.is_zero());
        assert!(r.empirical_variance < 0.02);

        let c = TrigFunction::constant(1, ExactComplex::new(q(3, 1), q(0, 1)));
        let r = clt_check(&c, &doubling, 64, 10, 0).unwrap();
        assert!(r.reference_variance.is_zero());
        assert_eq!(r.empirical_variance, 0.0);

        let shear = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(
            clt_check(&TrigFunction::cosine(&[1, 0], q(1, 1)), &shear, 8, 4, 0),
            Err(SolenoidError::NonErgodic { cyclotomic_index: 1 })
        );
    }
}
