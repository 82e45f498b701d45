use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{frac, grid_coords, ConjugacyError, ConjugacyField, PerturbedMap};

/// Sup and mean of `‖φ(τx) − Aφ(x)‖∞ mod 1` over random sample points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verification {
    pub sup: f64,
    pub mean: f64,
    pub samples: usize,
}

/// Evaluates the conjugacy equation at `samples` uniform points drawn from
/// a ChaCha8 stream seeded with `seed`, interpolating `h` off the grid.
pub fn verify_conjugacy(
    map: &PerturbedMap,
    field: &ConjugacyField,
    samples: usize,
    seed: u64,
) -> Result<Verification, ConjugacyError> {
    let d = map.dim();
    if field.dim() != d {
        return Err(ConjugacyError::DimensionMismatch { expected: d, found: field.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let lhs = field.phi(&map.apply(x));
            let rhs = map.linear(&field.phi(x));
            lhs.iter().zip(&rhs).map(|(a, b)| (frac(a - b + 0.5) - 0.5).abs()).fold(0.0, f64::max)
        })
        .collect();
    let sup = residuals.iter().copied().fold(0.0, f64::max);
    let mean = if samples == 0 { 0.0 } else { residuals.iter().sum::<f64>() / samples as f64 };
    Ok(Verification { sup, mean, samples })
}

/// Slope of `log ω(r)` against `log r` over the band `r ∈ [Δ, 10Δ]`, where
/// `ω` is the modulus of continuity measured on grid pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderEstimate {
    pub exponent: f64,
    /// 95% confidence interval of the slope.
    pub ci: (f64, f64),
    pub pairs: usize,
    /// `(log r, log ω(r))` for every grid shift in the band.
    pub points: Vec<(f64, f64)>,
}

const BAND: usize = 10;

/// Estimates the Hölder exponent of `h` from its modulus of continuity
/// `ω(sΔ) = max ‖h(x + sΔe_a) − h(x)‖∞`, `s = 1..=10`, taken over at most
/// `pair_samples` base points per axis and shift (evenly strided when fewer
/// than the grid size).
///
/// The worst pair is used rather than an average: a typical pair only sees
/// the local regularity, which is 1 away from the few points where a
/// Hölder singularity sits.
pub fn holder_estimate(field: &ConjugacyField, pair_samples: usize) -> Result<HolderEstimate, ConjugacyError> {
    let d = field.dim();
    let n = field.resolution();
    let total = field.len();
    let stride = total.div_ceil(pair_samples.max(1)).max(1);
    let bases: Vec<usize> = (0..total).step_by(stride).collect();
    let delta = 1.0 / n as f64;
    let mut points = Vec::new();
    let mut pairs = 0;
    for s in 1..=BAND.min(n - 1) {
        let omega = (0..d)
            .map(|axis| {
                bases
                    .par_iter()
                    .map(|&p| {
                        let mut c = grid_coords(p, d, n);
                        c[axis] = (c[axis] + s) % n;
                        let q = c.iter().rev().fold(0, |acc, &ci| acc * n + ci);
                        field.at_index(p).iter().zip(field.at_index(q)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                    })
                    .reduce(|| 0.0, f64::max)
            })
            .fold(0.0, f64::max);
        pairs += bases.len() * d;
        if omega > 0.0 {
            points.push(((s as f64 * delta).ln(), omega.ln()));
        }
    }
    if points.len() < 3 {
        return Err(ConjugacyError::DegenerateField);
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = points.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let df = points.len() - 2;
    let se = (sse / df as f64 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df as f64).expect("df ≥ 1").inverse_cdf(0.975);
    Ok(HolderEstimate { exponent: slope, ci: (slope - t * se, slope + t * se), pairs, points })
}
