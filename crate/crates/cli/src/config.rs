//! Versioned JSON inputs. Every object rejects unknown keys.

use std::fs;
use std::path::Path;

use hyperrank::conjugacy::TrigTerm;
use hyperrank::nilpotent::{CrtTarget, NilElement, NilStructure};
use hyperrank::solenoid::{DualMode, TrigFunction};
use hyperrank::spectra::ActionSpec;
use hyperrank::IntMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

pub const FORMAT: u32 = 1;

/// A rational written as an integer, a float (taken exactly) or `"p/q"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Rational {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Rational {
    pub fn value(&self) -> Result<BigRational, CliError> {
        match self {
            Rational::Int(n) => Ok(BigRational::from_integer((*n).into())),
            Rational::Float(x) => BigRational::from_float(*x).ok_or_else(|| CliError::Parse(format!("not a finite number: {x}"))),
            Rational::Text(s) => {
                let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|_| CliError::Parse(format!("bad rational {s:?}")));
                match s.split_once('/') {
                    Some((n, d)) => {
                        let d = parse(d)?;
                        if d.is_zero() {
                            return Err(CliError::Parse(format!("zero denominator in {s:?}")));
                        }
                        Ok(BigRational::new(parse(n)?, d))
                    }
                    None => Ok(BigRational::from_integer(parse(s)?)),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub k: Vec<Rational>,
    /// `[re, im]`, default `[1, 0]`.
    #[serde(default)]
    pub coeff: Option<[Rational; 2]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub bound: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingSection {
    /// Exponent vector `a ≥ 0` of the acting element; default `e_1`.
    pub direction: Option<Vec<u64>>,
    pub nmax: Option<u64>,
    pub mc_samples: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: Option<Vec<f64>>,
    #[serde(default)]
    pub sin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateSection {
    pub direction: Option<Vec<u64>>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
    #[serde(default)]
    pub perturbation: Vec<TermConfig>,
    pub verify_samples: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    pub format: u32,
    pub rank: Option<usize>,
    pub generators: Vec<Vec<Vec<i64>>>,
    pub primes: Option<Vec<u64>>,
    pub padic_precision: Option<u32>,
    pub seed: Option<u64>,
    pub f: Option<Vec<ModeConfig>>,
    pub g: Option<Vec<ModeConfig>>,
    pub analyze: Option<AnalyzeSection>,
    pub mixing: Option<MixingSection>,
    pub conjugate: Option<ConjugateSection>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn check_format(found: u32) -> Result<(), CliError> {
    if found != FORMAT {
        return Err(CliError::Parse(format!("unsupported format {found}, expected {FORMAT}")));
    }
    Ok(())
}

pub fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T, CliError> {
    if v <= T::default() {
        return Err(CliError::Parse(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}

impl ActionConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let c: ActionConfig = read_json(path)?;
        check_format(c.format)?;
        if c.generators.is_empty() {
            return Err(CliError::Parse("at least one generator is required".into()));
        }
        if let Some(k) = c.rank {
            if k != c.generators.len() {
                return Err(CliError::Parse(format!("rank {k} but {} generators", c.generators.len())));
            }
        }
        for (i, g) in c.generators.iter().enumerate() {
            if g.is_empty() || g.iter().any(|row| row.len() != g.len()) {
                return Err(CliError::Parse(format!("generator {i} is not a square matrix")));
            }
        }
        if let Some(k) = c.padic_precision {
            positive("padic_precision", k)?;
        }
        Ok(c)
    }

    pub fn matrices(&self) -> Vec<IntMatrix> {
        self.generators.iter().map(|g| IntMatrix::from_rows(g)).collect()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn action(&self) -> Result<ActionSpec, CliError> {
        Ok(ActionSpec::new(self.matrices(), self.primes.clone())?)
    }

    /// The config seed unless overridden on the command line or by
    /// `HYPERRANK_SEED`.
    pub fn seed(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(0)
    }

    pub fn function(&self, which: &str) -> Result<Option<TrigFunction>, CliError> {
        let modes = match which {
            "f" => &self.f,
            _ => &self.g,
        };
        let Some(modes) = modes else { return Ok(None) };
        let d = self.dim();
        let mut out = Vec::new();
        for m in modes {
            if m.k.len() != d {
                return Err(CliError::Parse(format!("mode of {which} has length {}, expected {d}", m.k.len())));
            }
            let vector = m.k.iter().map(Rational::value).collect::<Result<Vec<_>, _>>()?;
            let coeff = match &m.coeff {
                Some([re, im]) => Complex::new(re.value()?, im.value()?),
                None => Complex::new(BigRational::one(), BigRational::zero()),
            };
            out.push(DualMode::new(vector, coeff));
        }
        Ok(Some(TrigFunction::new(d, out)?))
    }

    pub fn direction(&self, given: &Option<Vec<u64>>) -> Result<Vec<u64>, CliError> {
        let k = self.generators.len();
        match given {
            Some(a) if a.len() != k => Err(CliError::Parse(format!("direction has length {}, expected {k}", a.len()))),
            Some(a) => Ok(a.clone()),
            None => Ok((0..k).map(|i| (i == 0) as u64).collect()),
        }
    }

    pub fn perturbation(&self) -> Result<Vec<TrigTerm>, CliError> {
        let d = self.dim();
        let section = self.conjugate.clone().unwrap_or_default();
        section
            .perturbation
            .iter()
            .map(|t| {
                let cos = t.cos.clone().unwrap_or_else(|| vec![0.0; d]);
                let sin = t.sin.clone().unwrap_or_else(|| vec![0.0; d]);
                if t.k.len() != d || cos.len() != d || sin.len() != d {
                    return Err(CliError::Parse(format!("perturbation terms need {d} entries per field")));
                }
                Ok(TrigTerm { k: t.k.clone(), cos, sin })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    pub format: u32,
    pub dim: usize,
    /// `[i, j, k, c]` for `[e_i, e_j] = c·e_k`, 0-based.
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, Rational)>,
    pub lattice_scaling: Option<Vec<Rational>>,
}

impl StructureConfig {
    pub fn load(path: &Path) -> Result<NilStructure, CliError> {
        let c: StructureConfig = read_json(path)?;
        check_format(c.format)?;
        let brackets = c
            .brackets
            .iter()
            .map(|(i, j, k, v)| Ok((*i, *j, *k, v.value()?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let scaling = c.lattice_scaling.map(|s| s.iter().map(Rational::value).collect::<Result<Vec<_>, _>>()).transpose()?;
        Ok(NilStructure::new(c.dim, &brackets, scaling.as_deref())?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub prime: u64,
    pub precision: u32,
    pub level: u32,
    pub xi: Vec<i64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    pub format: u32,
    pub targets: Vec<TargetConfig>,
}

impl TargetsConfig {
    pub fn load(path: &Path) -> Result<Vec<CrtTarget>, CliError> {
        let c: TargetsConfig = read_json(path)?;
        check_format(c.format)?;
        c.targets
            .iter()
            .map(|t| {
                positive("precision", t.precision)?;
                Ok(CrtTarget {
                    xi: NilElement::padic(t.prime, t.precision, t.xi.iter().map(|&x| BigInt::from(x)).collect()),
                    level: t.level,
                })
            })
            .collect()
    }
}
