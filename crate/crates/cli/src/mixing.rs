use std::path::PathBuf;

use hyperrank::solenoid::{
    exact_curve, fit_curve, mode_escape_time, monte_carlo_curve, write_curve_csv, McConfig, MixingFit, SolenoidError,
};
use hyperrank::spectra::ActionSpec;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::config::{positive, ActionConfig, FORMAT};
use crate::error::CliError;
use crate::output::emit;

const DEFAULT_NMAX: u64 = 12;
const DEFAULT_PRECISION: u32 = 12;

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum FitReport {
    Rate { eta: f64, prefactor: f64, residual: f64, points: usize },
    FiniteMode { n0: u64 },
    Degenerate { usable: usize },
}

#[derive(Serialize)]
struct MixingSummary {
    format: u32,
    direction: Vec<u64>,
    primes: Vec<u64>,
    nmax: u64,
    fit: FitReport,
    /// Least `N₀ ≤ nmax` after which no mode of `f` is carried onto `−g`.
    escape_time: Option<u64>,
    mc_samples: usize,
    seed: u64,
    /// `max_n |exact − estimate| / stderr` over entries with positive stderr.
    mc_max_z: Option<f64>,
}

pub struct MixingArgs {
    pub config: PathBuf,
    pub nmax: Option<u64>,
    pub mc: Option<usize>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub seed: Option<u64>,
}

pub fn run(args: MixingArgs) -> Result<(), CliError> {
    let cfg = ActionConfig::load(&args.config)?;
    let section = cfg.mixing.clone().unwrap_or_default();
    let nmax = positive("nmax", args.nmax.or(section.nmax).unwrap_or(DEFAULT_NMAX))?;
    let samples = args.mc.or(section.mc_samples).unwrap_or(0);
    let seed = cfg.seed(args.seed);
    let direction = cfg.direction(&section.direction)?;
    let f = cfg.function("f")?.ok_or_else(|| CliError::Parse("mixing needs modes for f".into()))?;
    // default g = conj(f), so that C(0) is the variance of f
    let g = cfg.function("g")?.unwrap_or_else(|| f.conjugate());

    // validates the generators; S defaults to the determinant primes
    let derived = ActionSpec::new(cfg.matrices(), None)?;
    let primes = cfg.primes.clone().unwrap_or_else(|| derived.primes().to_vec());
    let a = derived.element_nonneg(&direction);

    let entries = exact_curve(&f, &g, &a, &primes, nmax)?;
    let fit = match fit_curve(&entries) {
        Ok(MixingFit::Rate { eta, prefactor, residual, points }) => FitReport::Rate { eta, prefactor, residual, points },
        Ok(MixingFit::FiniteMode { n0 }) => FitReport::FiniteMode { n0 },
        Err(SolenoidError::DegenerateFit { usable }) => FitReport::Degenerate { usable },
        Err(e) => return Err(e.into()),
    };
    let escape_time = mode_escape_time(&f, &g, &a, &primes, nmax)?;

    let mc = if samples > 0 {
        let action = ActionSpec::new(cfg.matrices(), Some(primes.clone()))?;
        let mc_cfg = McConfig { samples, seed, precision: cfg.padic_precision.unwrap_or(DEFAULT_PRECISION) };
        monte_carlo_curve(&f, &g, &action, &direction, nmax, &mc_cfg)?
    } else {
        Vec::new()
    };
    let mc_max_z = mc
        .iter()
        .zip(&entries)
        .filter(|((_, est), _)| est.stderr > 0.0)
        .map(|((_, est), exact)| {
            let re = exact.value.re.to_f64().unwrap_or(f64::NAN) - est.value.re;
            let im = exact.value.im.to_f64().unwrap_or(f64::NAN) - est.value.im;
            re.hypot(im) / est.stderr
        })
        .reduce(f64::max);

    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &entries, &mc)?;
        std::fs::write(path, buf)?;
    }
    let summary = MixingSummary { format: FORMAT, direction, primes, nmax, fit, escape_time, mc_samples: samples, seed, mc_max_z };
    emit(args.summary.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    Ok(())
}
