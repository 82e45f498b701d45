use std::path::PathBuf;

use hyperrank::conjugacy::{
    holder_estimate, solve_conjugacy, verify_conjugacy, ConjugacyError, Perturbation, PerturbedMap, SolverConfig,
};
use serde::Serialize;

use crate::config::{positive, ActionConfig, FORMAT};
use crate::error::CliError;
use crate::output::emit;

const DEFAULT_VERIFY_SAMPLES: usize = 1000;

#[derive(Serialize)]
struct VerificationReport {
    sup: f64,
    mean: f64,
    samples: usize,
}

#[derive(Serialize)]
struct HolderReport {
    exponent: f64,
    ci: [f64; 2],
    pairs: usize,
}

#[derive(Serialize)]
struct ConjugateSummary {
    format: u32,
    grid: usize,
    tol: f64,
    sweeps: usize,
    final_residual: f64,
    residuals: Vec<f64>,
    contraction_bound: f64,
    min_modulus: f64,
    /// One-dimensional fields only.
    increasing: Option<bool>,
    verification: VerificationReport,
    /// Absent when `h` is constant.
    holder: Option<HolderReport>,
    seed: u64,
}

pub struct ConjugateArgs {
    pub config: PathBuf,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub seed: Option<u64>,
}

pub fn run(args: ConjugateArgs) -> Result<(), CliError> {
    let cfg = ActionConfig::load(&args.config)?;
    let section = cfg.conjugate.clone().ok_or_else(|| CliError::Parse("config has no conjugate section".into()))?;
    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        resolution: positive("grid", args.grid.or(section.grid).unwrap_or(defaults.resolution))?,
        tol: positive("tol", args.tol.or(section.tol).unwrap_or(defaults.tol))?,
        budget: positive("budget", section.budget.unwrap_or(defaults.budget))?,
    };
    let samples = section.verify_samples.unwrap_or(DEFAULT_VERIFY_SAMPLES);
    let seed = cfg.seed(args.seed);
    let action = cfg.action()?;
    let a = action.element_nonneg(&cfg.direction(&section.direction)?);
    let map = PerturbedMap::new(a, Perturbation::Trig(cfg.perturbation()?))?;
    let field = solve_conjugacy(&map, &solver)?;
    let v = verify_conjugacy(&map, &field, samples, seed)?;
    let holder = match holder_estimate(&field, usize::MAX) {
        Ok(h) => Some(HolderReport { exponent: h.exponent, ci: [h.ci.0, h.ci.1], pairs: h.pairs }),
        Err(ConjugacyError::DegenerateField) => None,
        Err(e) => return Err(e.into()),
    };

    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    let summary = ConjugateSummary {
        format: FORMAT,
        grid: solver.resolution,
        tol: solver.tol,
        sweeps: field.sweeps(),
        final_residual: field.final_residual(),
        residuals: field.residuals().to_vec(),
        contraction_bound: map.contraction_bound(),
        min_modulus: map.min_modulus(),
        increasing: (field.dim() == 1).then(|| field.is_increasing()),
        verification: VerificationReport { sup: v.sup, mean: v.mean, samples: v.samples },
        holder,
        seed,
    };
    emit(args.summary.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    Ok(())
}
