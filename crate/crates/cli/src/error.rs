use std::io;

use hyperrank::conjugacy::ConjugacyError;
use hyperrank::ergodicity::ErgodicityError;
use hyperrank::nilpotent::NilError;
use hyperrank::solenoid::SolenoidError;
use hyperrank::spectra::SpectraError;

/// Failures mapped onto the exit-code taxonomy.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(io::Error),
    Failed(String),
    /// Certified rank-one factor or no ergodic ℤ² subgroup.
    Obstruction(String),
    Inconclusive(String),
    DualLattice(u64),
    NotExpanding(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) | CliError::Failed(_) => 1,
            CliError::Obstruction(_) => 2,
            CliError::Inconclusive(_) => 3,
            CliError::DualLattice(_) => 4,
            CliError::NotExpanding(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Failed(m) => write!(f, "{m}"),
            CliError::Obstruction(m) => write!(f, "obstruction: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            CliError::DualLattice(p) => write!(f, "a mode leaves the dual lattice: prime {p} is missing from S"),
            CliError::NotExpanding(m) => write!(f, "not expanding: {m}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<SolenoidError> for CliError {
    fn from(e: SolenoidError) -> Self {
        match e {
            SolenoidError::LeavesDualLattice { prime } => CliError::DualLattice(prime),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<ErgodicityError> for CliError {
    fn from(e: ErgodicityError) -> Self {
        match e {
            ErgodicityError::FactorSearchInconclusive => CliError::Inconclusive(e.to_string()),
            ErgodicityError::RankOneFactor { .. } | ErgodicityError::NoErgodicSubgroupFound { .. } => {
                CliError::Obstruction(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<ConjugacyError> for CliError {
    fn from(e: ConjugacyError) -> Self {
        match e {
            ConjugacyError::NotExpanding { .. } => CliError::NotExpanding(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<NilError> for CliError {
    fn from(e: NilError) -> Self {
        CliError::Failed(e.to_string())
    }
}
