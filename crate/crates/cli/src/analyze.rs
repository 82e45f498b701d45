use std::path::PathBuf;

use hyperrank::ergodicity::{ergodic_element, ergodic_z2_subgroup, has_rank_one_factor, is_ergodic, ErgodicityError};
use hyperrank::spectra::{joint_spectrum, min_expansion_rate, DEFAULT_TOL};
use serde::Serialize;

use crate::config::{positive, ActionConfig, FORMAT};
use crate::error::CliError;
use crate::output::emit;

const DEFAULT_BOUND: u64 = 20;

#[derive(Serialize)]
struct GeneratorReport {
    index: usize,
    ergodic: bool,
    /// Cyclotomic indices `m` with `gcd(charpoly, Φ_m) = 1` checked.
    checked: Vec<u64>,
    cyclotomic_index: Option<u64>,
    dual_vector: Option<Vec<String>>,
}

#[derive(Serialize)]
struct FunctionalReport {
    place: String,
    values: Vec<f64>,
    multiplicity: usize,
    slopes: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ChamberReport {
    functionals: Vec<usize>,
    signs: Vec<i8>,
    representative: Vec<i64>,
}

#[derive(Serialize)]
struct RankOneReport {
    block_ranks: Vec<usize>,
    offending_block: Option<usize>,
}

#[derive(Serialize)]
struct Z2Report {
    a: Vec<i64>,
    b: Vec<i64>,
    certified: usize,
}

#[derive(Serialize)]
struct ObstructionReport {
    kind: &'static str,
    detail: String,
    elements: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct AnalysisReport {
    format: u32,
    rank: usize,
    dim: usize,
    primes: Vec<u64>,
    search_bound: u64,
    generators: Vec<GeneratorReport>,
    lyapunov: Vec<FunctionalReport>,
    coarse_classes: Vec<Vec<usize>>,
    chambers: Vec<ChamberReport>,
    min_expansion_rate: Option<f64>,
    ergodic_element: Option<Vec<i64>>,
    rank_one_factor: Option<RankOneReport>,
    ergodic_z2: Option<Z2Report>,
    obstruction: Option<ObstructionReport>,
    inconclusive: bool,
}

pub fn run(config: PathBuf, bound: Option<u64>, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = ActionConfig::load(&config)?;
    let bound = positive("bound", bound.or(cfg.analyze.as_ref().and_then(|a| a.bound)).unwrap_or(DEFAULT_BOUND))?;
    let action = cfg.action()?;
    let spectrum = joint_spectrum(&action, DEFAULT_TOL)?;

    let generators = action
        .generators()
        .iter()
        .enumerate()
        .map(|(index, g)| {
            let c = is_ergodic(g);
            GeneratorReport {
                index,
                ergodic: c.is_ergodic(),
                checked: c.checked.clone(),
                cyclotomic_index: c.cyclotomic_index,
                dual_vector: c.dual_vector.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect()),
            }
        })
        .collect();
    let lyapunov = spectrum
        .functionals
        .iter()
        .map(|f| FunctionalReport {
            place: f.place.to_string(),
            values: f.values.clone(),
            multiplicity: f.multiplicity,
            slopes: f.slopes.as_ref().map(|s| s.iter().map(|r| r.to_string()).collect()),
        })
        .collect();
    let chambers = spectrum
        .chambers
        .iter()
        .map(|c| ChamberReport { functionals: c.functionals.clone(), signs: c.signs.clone(), representative: c.representative.clone() })
        .collect();

    let mut report = AnalysisReport {
        format: FORMAT,
        rank: action.rank(),
        dim: action.dim(),
        primes: action.primes().to_vec(),
        search_bound: bound,
        generators,
        lyapunov,
        coarse_classes: spectrum.classes.clone(),
        chambers,
        min_expansion_rate: min_expansion_rate(&spectrum).ok(),
        ergodic_element: ergodic_element(&action, bound).ok().map(|(a, _)| a),
        rank_one_factor: None,
        ergodic_z2: None,
        obstruction: None,
        inconclusive: false,
    };

    // Rank-one factors and ergodic ℤ² subgroups only make sense from rank two on.
    let mut outcome = Ok(());
    if action.rank() >= 2 {
        match has_rank_one_factor(&action) {
            Err(e @ ErgodicityError::FactorSearchInconclusive) => {
                report.inconclusive = true;
                outcome = Err(CliError::from(e));
            }
            Err(e) => return Err(e.into()),
            Ok(verdict) => {
                report.rank_one_factor =
                    Some(RankOneReport { block_ranks: verdict.block_ranks.clone(), offending_block: verdict.offending_block });
                if let Some(block) = verdict.offending_block {
                    let detail = format!("block {block} has Lyapunov rank {}", verdict.block_ranks[block]);
                    report.obstruction = Some(ObstructionReport { kind: "rank-one-factor", detail: detail.clone(), elements: vec![] });
                    outcome = Err(CliError::Obstruction(detail));
                } else {
                    match ergodic_z2_subgroup(&action, bound) {
                        Ok(z2) => report.ergodic_z2 = Some(Z2Report { a: z2.a, b: z2.b, certified: z2.certified }),
                        Err(ErgodicityError::NoErgodicSubgroupFound { bound, obstructions }) => {
                            let detail = format!("no ergodic Z^2 subgroup up to bound {bound}");
                            report.obstruction =
                                Some(ObstructionReport { kind: "no-ergodic-z2", detail: detail.clone(), elements: obstructions });
                            outcome = Err(CliError::Obstruction(detail));
                        }
                        Err(e @ ErgodicityError::FactorSearchInconclusive) => {
                            report.inconclusive = true;
                            outcome = Err(CliError::from(e));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
    emit(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    outcome
}
