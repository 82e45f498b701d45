use std::collections::HashSet;
use std::io::{self, Write};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{check_setting, correlation_with_power, ExactComplex, McEstimate, SolenoidError, TrigFunction};
use crate::algebra::{IntMatrix, QMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveMethod {
    Exact,
    MonteCarlo,
}

impl CurveMethod {
    pub fn label(self) -> &'static str {
        match self {
            CurveMethod::Exact => "exact",
            CurveMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// One exact correlation `C(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveEntry {
    pub n: u64,
    pub value: ExactComplex,
}

impl CurveEntry {
    pub fn modulus(&self) -> f64 {
        let re = self.value.re.to_f64().unwrap_or(0.0);
        let im = self.value.im.to_f64().unwrap_or(0.0);
        re.hypot(im)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MixingFit {
    /// Least squares `log|C(n)| ≈ log a₁ − η′·n` over the nonzero entries;
    /// `residual` is the root mean square of the fit residuals.
    Rate { eta: f64, prefactor: f64, residual: f64, points: usize },
    /// Every entry from `n0` on is exactly zero.
    FiniteMode { n0: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixingCurve {
    pub entries: Vec<CurveEntry>,
    pub fit: MixingFit,
}

/// Exact correlations `C(n)` of [`super::exact_correlation`] for
/// `0 ≤ n ≤ n_max`.
pub fn exact_curve(
    f: &TrigFunction,
    g: &TrigFunction,
    a: &IntMatrix,
    primes: &[u64],
    n_max: u64,
) -> Result<Vec<CurveEntry>, SolenoidError> {
    check_setting(f, g, a, primes)?;
    let at = a.transpose().to_rational();
    let mut power = QMatrix::identity(a.dim());
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        if n > 0 {
            power = at.mul(&power);
        }
        out.push(CurveEntry { n, value: correlation_with_power(f, g, &power) });
    }
    Ok(out)
}

/// Ordinary least squares of `log y` against `x` over points with `y > 0`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<MixingFit, SolenoidError> {
    let usable: Vec<(f64, f64)> = points.iter().filter(|(_, y)| *y > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    let m = usable.len();
    if m < 2 {
        return Err(SolenoidError::DegenerateFit { usable: m });
    }
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SolenoidError::DegenerateFit { usable: m });
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / m as f64).sqrt();
    Ok(MixingFit::Rate { eta: -slope, prefactor: intercept.exp(), residual, points: m })
}

/// Finite-mode exact mixing when at least half of the entries are exactly
/// zero and the curve ends in zeros, otherwise a decay fit.
pub fn fit_curve(entries: &[CurveEntry]) -> Result<MixingFit, SolenoidError> {
    let zeros = entries.iter().filter(|e| e.value.is_zero()).count();
    if !entries.is_empty() && 2 * zeros >= entries.len() {
        let last_nonzero = entries.iter().rposition(|e| !e.value.is_zero());
        if last_nonzero != Some(entries.len() - 1) {
            let n0 = last_nonzero.map_or(entries[0].n, |i| entries[i].n + 1);
            return Ok(MixingFit::FiniteMode { n0 });
        }
    }
    let points: Vec<(f64, f64)> = entries.iter().map(|e| (e.n as f64, e.modulus())).collect();
    fit_decay(&points)
}

pub fn mixing_curve(
    f: &TrigFunction,
    g: &TrigFunction,
    a: &IntMatrix,
    primes: &[u64],
    n_max: u64,
) -> Result<MixingCurve, SolenoidError> {
    let entries = exact_curve(f, g, a, primes, n_max)?;
    let fit = fit_curve(&entries)?;
    Ok(MixingCurve { entries, fit })
}

/// Mode-orbit escape time: the least `N₀ ≤ horizon` such that
/// `(Aᵀ)ⁿ(modes of f) ∩ (−modes of g)` is empty for every `N₀ ≤ n ≤ horizon`,
/// ignoring the zero mode. `None` when a match occurs at the horizon.
pub fn mode_escape_time(
    f: &TrigFunction,
    g: &TrigFunction,
    a: &IntMatrix,
    primes: &[u64],
    horizon: u64,
) -> Result<Option<u64>, SolenoidError> {
    check_setting(f, g, a, primes)?;
    let targets: HashSet<Vec<BigRational>> = g
        .modes()
        .iter()
        .filter(|m| !m.is_zero_mode())
        .map(|m| m.vector.iter().map(|x| -x).collect())
        .collect();
    let at = a.transpose().to_rational();
    let mut orbit: Vec<Vec<BigRational>> =
        f.modes().iter().filter(|m| !m.is_zero_mode()).map(|m| m.vector.clone()).collect();
    let mut last = None;
    for n in 0..=horizon {
        if n > 0 {
            orbit = orbit.iter().map(|v| at.mul_vec(v)).collect();
        }
        if orbit.iter().any(|v| targets.contains(v)) {
            last = Some(n);
        }
    }
    Ok(match last {
        Some(n) if n == horizon => None,
        Some(n) => Some(n + 1),
        None => Some(0),
    })
}

fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:e}")
    }
}

/// Writes `n,re,im,method,samples,stderr` rows: exact entries first, then
/// Monte Carlo estimates.
pub fn write_curve_csv<W: Write>(mut w: W, exact: &[CurveEntry], monte_carlo: &[(u64, McEstimate)]) -> io::Result<()> {
    writeln!(w, "n,re,im,method,samples,stderr")?;
    for e in exact {
        let re = e.value.re.to_f64().unwrap_or(f64::NAN);
        let im = e.value.im.to_f64().unwrap_or(f64::NAN);
        writeln!(w, "{},{},{},{},0,0", e.n, fmt_f64(re), fmt_f64(im), CurveMethod::Exact.label())?;
    }
    for (n, m) in monte_carlo {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            n,
            fmt_f64(m.value.re),
            fmt_f64(m.value.im),
            CurveMethod::MonteCarlo.label(),
            m.samples,
            fmt_f64(m.stderr)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solenoid::DualMode;
    use num_bigint::BigInt;
    use num_complex::Complex;
    use num_traits::One;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn doubling() -> IntMatrix {
        IntMatrix::from_rows(&[vec![2]])
    }

    fn cat() -> IntMatrix {
        IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])
    }

    /// `Σ_{j≤J} c_j χ_{2^j}` on the circle.
    fn lacunary(coeffs: &[BigRational]) -> TrigFunction {
        let modes = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| DualMode::new(vec![q(1 << j, 1)], Complex::new(c.clone(), BigRational::zero())))
            .collect();
        TrigFunction::new(1, modes).unwrap()
    }

    fn halves(j: usize) -> Vec<BigRational> {
        (0..=j).map(|i| BigRational::new(BigInt::one(), BigInt::one() << i)).collect()
    }

    #[test]
    fn lacunary_doubling_curve() {
        let f = lacunary(&halves(8));
        let curve = mixing_curve(&f, &f.conjugate(), &doubling(), &[2], 12).unwrap();
        for e in &curve.entries {
            // C(n) = Σ_{j ≤ 8−n} 2^{−2j−n}
            let expect: BigRational = if e.n > 8 {
                BigRational::zero()
            } else {
                (0..=8 - e.n).map(|j| BigRational::new(BigInt::one(), BigInt::one() << (2 * j + e.n))).sum()
            };
            assert_eq!(e.value, Complex::new(expect, BigRational::zero()), "n = {}", e.n);
        }
        match curve.fit {
            MixingFit::Rate { eta, .. } => assert!((eta - 2f64.ln()).abs() <= 0.05, "eta = {eta}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn synthetic_exponential() {
        let pts: Vec<(f64, f64)> = (0..20).map(|n| (n as f64, (-0.7 * n as f64).exp())).collect();
        match fit_decay(&pts).unwrap() {
            MixingFit::Rate { eta, prefactor, residual, points } => {
                assert!((eta - 0.7).abs() < 1e-12);
                assert!((prefactor - 1.0).abs() < 1e-12);
                assert!(residual < 1e-12);
                assert_eq!(points, 20);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(fit_decay(&[(1.0, 0.5), (2.0, 0.0)]), Err(SolenoidError::DegenerateFit { usable: 1 }));
    }

    #[test]
    fn single_character_escapes() {
        let chi = TrigFunction::character(&[1, 0]);
        let curve = mixing_curve(&chi, &chi.conjugate(), &cat(), &[], 10).unwrap();
        assert_eq!(curve.fit, MixingFit::FiniteMode { n0: 1 });
        assert_eq!(mode_escape_time(&chi, &chi.conjugate(), &cat(), &[], 10).unwrap(), Some(1));

        // χ_{(1,0)} against conj χ_{(5,3)} = conj χ_{(Aᵀ)²(1,0)}
        let g = TrigFunction::character(&[-5, -3]);
        let curve = mixing_curve(&chi, &g, &cat(), &[], 10).unwrap();
        assert_eq!(curve.fit, MixingFit::FiniteMode { n0: 3 });
        assert!(curve.entries[2].value.re.is_one());
        assert_eq!(mode_escape_time(&chi, &g, &cat(), &[], 10).unwrap(), Some(3));
        assert_eq!(mode_escape_time(&chi, &g, &cat(), &[], 2).unwrap(), None);
    }

    #[test]
    fn escape_time_is_final() {
        // past N₀ the orbit norms keep growing, so no later match is possible
        for k in [[1i64, 0], [0, 1], [1, -2], [3, -1]] {
            let f = TrigFunction::character(&k);
            for m in [[-1i64, 0], [2, -3], [-8, -5]] {
                let g = TrigFunction::character(&m);
                let n0 = mode_escape_time(&f, &g, &cat(), &[], 64).unwrap().unwrap();
                assert!(n0 <= 8);
                let curve = exact_curve(&f, &g, &cat(), &[], 64).unwrap();
                assert!(curve[n0 as usize..].iter().all(|e| e.value.is_zero()));
            }
        }
    }

    #[test]
    fn dual_lattice_errors() {
        let f = TrigFunction::new(1, vec![DualMode::new(vec![q(1, 2)], Complex::new(q(1, 1), q(0, 1)))]).unwrap();
        assert_eq!(
            exact_curve(&f, &f.conjugate(), &doubling(), &[3], 4),
            Err(SolenoidError::LeavesDualLattice { prime: 2 })
        );
        assert!(exact_curve(&f, &f.conjugate(), &doubling(), &[2], 4).is_ok());
    }

    #[test]
    fn csv_layout() {
        let f = lacunary(&halves(2));
        let curve = exact_curve(&f, &f.conjugate(), &doubling(), &[2], 3).unwrap();
        let mc = vec![(1, McEstimate { value: Complex::new(0.25, 0.0), stderr: 0.01, samples: 100 })];
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve, &mc).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,re,im,method,samples,stderr");
        assert_eq!(lines.len(), 6);
        assert!(lines[4].starts_with("3,0,0,exact"));
        assert_eq!(lines[5], "1,2.5e-1,0,monte-carlo,100,1e-2");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Extending a lacunary function by a mode at twice the frequency
        /// with half the coefficient never speeds up the fitted decay by more
        /// than the fit residual.
        #[test]
        fn extra_modes_do_not_speed_up_decay(raw in proptest::collection::vec(1i64..=8, 3..7)) {
            let coeffs: Vec<BigRational> = raw.iter().map(|&c| q(c, 8)).collect();
            let f = lacunary(&coeffs);
            let mut extended = coeffs.clone();
            extended.push(coeffs.last().unwrap() / BigRational::from_integer(2.into()));
            let g = lacunary(&extended);
            let n_max = coeffs.len() as u64 + 1;
            let fit = |h: &TrigFunction| fit_decay(
                &exact_curve(h, &h.conjugate(), &doubling(), &[2], n_max).unwrap().iter().map(|e| (e.n as f64, e.modulus())).collect::<Vec<_>>(),
            ).unwrap();
            let (MixingFit::Rate { eta: e0, residual: r0, .. }, MixingFit::Rate { eta: e1, residual: r1, .. }) = (fit(&f), fit(&g)) else {
                panic!("expected decay fits");
            };
            prop_assert!(e1 <= e0 + r0.max(r1) + 1e-12, "{} -> {} (residuals {}, {})", e0, e1, r0, r1);
        }
    }
}
