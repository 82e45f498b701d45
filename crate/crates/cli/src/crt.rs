use std::fmt::Write as _;
use std::path::PathBuf;

use hyperrank::nilpotent::{nil_crt, NilElement, Scalars};

use crate::config::{StructureConfig, TargetsConfig};
use crate::error::CliError;
use crate::output::emit;

fn coords(e: &NilElement) -> String {
    let parts: Vec<String> = e.coords().iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Prints the solution and the congruence transcript.
pub fn run(structure: PathBuf, targets: PathBuf) -> Result<(), CliError> {
    let s = StructureConfig::load(&structure)?;
    let targets = TargetsConfig::load(&targets)?;
    let sol = nil_crt(&s, &targets)?;
    let mut out = String::new();
    let derived: Vec<String> = s.derived_indices().iter().map(|i| i.to_string()).collect();
    writeln!(out, "structure: dim {}, derived coordinates [{}]", s.dim(), derived.join(", ")).unwrap();
    for t in &targets {
        if let Scalars::Padic { p, precision } = t.xi.ring() {
            writeln!(out, "target: xi = {} mod {p}^{precision}, level {}", coords(&t.xi), t.level).unwrap();
        }
    }
    for (i, stage) in sol.stages.iter().enumerate() {
        writeln!(out, "stage {} ({}): {}", i + 1, stage.label, coords(&stage.factor)).unwrap();
    }
    writeln!(out, "n = {}", coords(&sol.n)).unwrap();
    for c in &sol.checks {
        let verdict = if c.holds { "ok" } else { "FAILED" };
        writeln!(out, "check p = {}: n^-1 xi = {} vanishes mod {}^{}: {verdict}", c.prime, coords(&c.residual), c.prime, c.level)
            .unwrap();
    }
    emit(None, &out)?;
    Ok(())
}
