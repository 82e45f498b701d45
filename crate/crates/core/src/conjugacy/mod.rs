//! Topological conjugacy between a perturbed expanding toral endomorphism
//! `τ(x) = Ax + q(x)` and its linear part, computed as the fixed point of
//! `h ← A⁻¹(q + h∘τ)` on a uniform grid.

mod estimate;

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::IntMatrix;
use crate::spectra::{real_lyapunov, SpectraError};

pub use estimate::{holder_estimate, verify_conjugacy, HolderEstimate, Verification};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConjugacyError {
    #[error("map is not expanding enough: min |λ| = {min_modulus}, sup ‖Dq‖ ≤ {lipschitz}")]
    NotExpanding { min_modulus: f64, lipschitz: f64 },
    #[error("no convergence within {budget} sweeps (last residual {})", history.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { budget: usize, history: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid resolution must be at least 2")]
    InvalidGrid,
    #[error("the field is constant; no Hölder exponent is defined")]
    DegenerateField,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// `cos·cos(2π⟨k,x⟩) + sin·sin(2π⟨k,x⟩)` with vector coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigTerm {
    pub k: Vec<i64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

type PerturbationFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A periodic map `q: T^d → ℝ^d`.
#[derive(Clone)]
pub enum Perturbation {
    Trig(Vec<TrigTerm>),
    /// `f(x, out)` with caller-supplied bounds on `‖q‖∞` and `sup ‖Dq‖`.
    Callable { f: PerturbationFn, sup: f64, lipschitz: f64 },
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Trig(t) => f.debug_tuple("Trig").field(t).finish(),
            Perturbation::Callable { sup, lipschitz, .. } => {
                f.debug_struct("Callable").field("sup", sup).field("lipschitz", lipschitz).finish_non_exhaustive()
            }
        }
    }
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation::Trig(Vec::new())
    }

    /// The constant map `x ↦ δ`.
    pub fn constant(delta: &[f64]) -> Self {
        Perturbation::Trig(vec![TrigTerm { k: vec![0; delta.len()], cos: delta.to_vec(), sin: vec![0.0; delta.len()] }])
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Perturbation::Trig(terms) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for t in terms {
                    let phase: f64 = t.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                    let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += t.cos[i] * c + t.sin[i] * s;
                    }
                }
            }
            Perturbation::Callable { f, .. } => f(x, out),
        }
    }

    /// Upper bound on `‖q‖∞`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Perturbation::Trig(terms) => terms
                .iter()
                .map(|t| t.cos.iter().zip(&t.sin).map(|(c, s)| c.abs() + s.abs()).fold(0.0, f64::max))
                .sum(),
            Perturbation::Callable { sup, .. } => *sup,
        }
    }

    /// Upper bound on the operator 2-norm of `Dq`.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            Perturbation::Trig(terms) => terms
                .iter()
                .map(|t| {
                    let k = t.k.iter().map(|&k| (k as f64).powi(2)).sum::<f64>().sqrt();
                    let c = t.cos.iter().chain(&t.sin).map(|v| v * v).sum::<f64>().sqrt();
                    std::f64::consts::TAU * k * c
                })
                .sum(),
            Perturbation::Callable { lipschitz, .. } => *lipschitz,
        }
    }

    fn check_dim(&self, d: usize) -> Result<(), ConjugacyError> {
        if let Perturbation::Trig(terms) = self {
            for t in terms {
                for len in [t.k.len(), t.cos.len(), t.sin.len()] {
                    if len != d {
                        return Err(ConjugacyError::DimensionMismatch { expected: d, found: len });
                    }
                }
            }
        }
        Ok(())
    }
}

/// `τ(x) = Ax + q(x) mod 1` with the sufficient expansion condition
/// `sup ‖Dq‖ < min |λ(A)| − 1` checked at construction.
#[derive(Clone, Debug)]
pub struct PerturbedMap {
    a: IntMatrix,
    a_f64: Vec<f64>,
    a_inv: Vec<f64>,
    q: Perturbation,
    min_modulus: f64,
}

impl PerturbedMap {
    pub fn new(a: IntMatrix, q: Perturbation) -> Result<Self, ConjugacyError> {
        let d = a.dim();
        q.check_dim(d)?;
        let lipschitz = q.lipschitz_bound();
        let inv = a.to_rational().inverse();
        let min_modulus = match inv {
            Some(_) => {
                let exps = real_lyapunov(&a, 1e-9)?;
                exps.iter().map(|(e, _)| e.exp()).fold(f64::INFINITY, f64::min)
            }
            None => 0.0,
        };
        if !(min_modulus > 1.0 && lipschitz < min_modulus - 1.0) {
            return Err(ConjugacyError::NotExpanding { min_modulus, lipschitz });
        }
        let inv = inv.expect("nonsingular");
        let a_inv = (0..d).flat_map(|i| inv.row_vec(i)).map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        let a_f64 = a.to_f64_rows().concat();
        Ok(PerturbedMap { a, a_f64, a_inv, q, min_modulus })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn linear_part(&self) -> &IntMatrix {
        &self.a
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.q
    }

    pub fn min_modulus(&self) -> f64 {
        self.min_modulus
    }

    /// `‖A⁻¹‖∞`, the sup-norm contraction rate of the fixed-point sweep.
    pub fn contraction_bound(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.a_inv[i * d..(i + 1) * d].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.q.lipschitz_bound()
    }

    /// `A x` without reduction.
    pub fn linear(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.a_f64, x)
    }

    /// `τ(x)` reduced into `[0, 1)^d`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut qx = vec![0.0; x.len()];
        self.q.eval(x, &mut qx);
        self.linear(x).iter().zip(&qx).map(|(a, b)| frac(a + b)).collect()
    }

    /// `τ² = A²x + (A q(x) + q(τx))`, with the derivative bound
    /// `‖A‖L + L(‖A‖ + L)`.
    pub fn square(&self) -> Result<PerturbedMap, ConjugacyError> {
        let d = self.dim();
        let l = self.q.lipschitz_bound();
        let norm_a = DMatrix::from_row_slice(d, d, &self.a_f64).singular_values().max();
        let sup = norm_a * self.q.sup_bound() + self.q.sup_bound();
        let inner = self.clone();
        let f: PerturbationFn = Arc::new(move |x: &[f64], out: &mut [f64]| {
            let mut qx = vec![0.0; x.len()];
            inner.q.eval(x, &mut qx);
            let tx = inner.apply(x);
            inner.q.eval(&tx, out);
            for (o, v) in out.iter_mut().zip(inner.linear(&qx)) {
                *o += v;
            }
        });
        let q = Perturbation::Callable { f, sup, lipschitz: norm_a * l + l * (norm_a + l) };
        PerturbedMap::new(self.a.mul(&self.a), q)
    }
}

pub(crate) fn mat_vec(m: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d).map(|i| m[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Grid points per axis.
    pub resolution: usize,
    pub tol: f64,
    /// Maximum number of sweeps.
    pub budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { resolution: 256, tol: 1e-8, budget: 200 }
    }
}

/// Displacement `h` on the grid `{i/n}^d`, axis 0 varying fastest, with
/// the sup-norm update size of every sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyField {
    dim: usize,
    resolution: usize,
    values: Vec<f64>,
    residuals: Vec<f64>,
}

impl ConjugacyField {
    /// A field given directly by grid values (`resolution^dim` points, `dim`
    /// components each).
    pub fn from_grid(dim: usize, resolution: usize, values: Vec<f64>) -> Result<Self, ConjugacyError> {
        if resolution < 2 {
            return Err(ConjugacyError::InvalidGrid);
        }
        let expected = resolution.pow(dim as u32) * dim;
        if values.len() != expected {
            return Err(ConjugacyError::DimensionMismatch { expected, found: values.len() });
        }
        Ok(ConjugacyField { dim, resolution, values, residuals: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `h` at grid point number `idx`.
    pub fn at_index(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn grid_point(&self, idx: usize) -> Vec<f64> {
        grid_coords(idx, self.dim, self.resolution).iter().map(|&i| i as f64 / self.resolution as f64).collect()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    /// Ratios of consecutive residuals, skipping those already at round-off
    /// level.
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.residuals.windows(2).filter(|w| w[0] > 1e-13).map(|w| w[1] / w[0]).collect()
    }

    /// Multilinear interpolation of `h` at a point of the torus.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let (idx, w) = stencil(x, self.resolution);
        let mut out = vec![0.0; self.dim];
        for (&i, &wi) in idx.iter().zip(&w) {
            for (o, v) in out.iter_mut().zip(self.at_index(i)) {
                *o += wi * v;
            }
        }
        out
    }

    /// `φ(x) = x + h(x)` on the lift of `x`.
    pub fn phi(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.eval(x)).map(|(a, b)| a + b).collect()
    }

    /// Whether `φ` is strictly increasing along the grid (one-dimensional
    /// fields only; the wrap-around step adds 1).
    pub fn is_increasing(&self) -> bool {
        if self.dim != 1 {
            return false;
        }
        let n = self.resolution;
        (0..n).all(|i| {
            let here = i as f64 / n as f64 + self.values[i];
            let next = if i + 1 == n { 1.0 + self.values[0] } else { (i + 1) as f64 / n as f64 + self.values[i + 1] };
            next > here
        })
    }

    /// CSV with the grid indices and the components of `h`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let idx: Vec<String> = (0..self.dim).map(|a| format!("i{a}")).collect();
        let comp: Vec<String> = (0..self.dim).map(|a| format!("h{a}")).collect();
        writeln!(w, "{},{}", idx.join(","), comp.join(","))?;
        for p in 0..self.len() {
            let coords = grid_coords(p, self.dim, self.resolution);
            let c: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
            let h: Vec<String> = self.at_index(p).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", c.join(","), h.join(","))?;
        }
        Ok(())
    }
}

fn grid_coords(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let c = idx % n;
            idx /= n;
            c
        })
        .collect()
}

/// Corner indices and weights of the multilinear stencil around `x`.
fn stencil(x: &[f64], n: usize) -> (Vec<usize>, Vec<f64>) {
    let d = x.len();
    let mut base = Vec::with_capacity(d);
    let mut frac_part = Vec::with_capacity(d);
    for &xi in x {
        let t = frac(xi) * n as f64;
        let i0 = t.floor();
        base.push((i0 as usize) % n);
        frac_part.push(t - i0);
    }
    let corners = 1usize << d;
    let mut idx = Vec::with_capacity(corners);
    let mut w = Vec::with_capacity(corners);
    for mask in 0..corners {
        let mut flat = 0;
        let mut stride = 1;
        let mut weight = 1.0;
        for a in 0..d {
            let up = mask >> a & 1 == 1;
            let i = if up { (base[a] + 1) % n } else { base[a] };
            weight *= if up { frac_part[a] } else { 1.0 - frac_part[a] };
            flat += i * stride;
            stride *= n;
        }
        idx.push(flat);
        w.push(weight);
    }
    (idx, w)
}

const CHUNK: usize = 1024;

/// Iterates `h ← A⁻¹(q + h∘τ)` from `h = 0` until the sup-norm change of a
/// sweep drops below `tol`.
///
/// Sweeps are double-buffered: every chunk of the new field reads only the
/// previous snapshot, so the result does not depend on the thread count.
pub fn solve_conjugacy(map: &PerturbedMap, config: &SolverConfig) -> Result<ConjugacyField, ConjugacyError> {
    let d = map.dim();
    let n = config.resolution;
    if n < 2 {
        return Err(ConjugacyError::InvalidGrid);
    }
    let points = n.pow(d as u32);
    let corners = 1usize << d;
    let mut qv = vec![0.0; points * d];
    let mut st_idx = vec![0usize; points * corners];
    let mut st_w = vec![0.0; points * corners];
    qv.par_chunks_mut(d)
        .zip(st_idx.par_chunks_mut(corners).zip(st_w.par_chunks_mut(corners)))
        .enumerate()
        .for_each(|(p, (q, (si, sw)))| {
            let x: Vec<f64> = grid_coords(p, d, n).iter().map(|&i| i as f64 / n as f64).collect();
            map.q.eval(&x, q);
            let (idx, w) = stencil(&map.apply(&x), n);
            si.copy_from_slice(&idx);
            sw.copy_from_slice(&w);
        });

    let mut cur = vec![0.0; points * d];
    let mut next = vec![0.0; points * d];
    let mut residuals = Vec::new();
    while residuals.len() < config.budget {
        let res = next
            .par_chunks_mut(CHUNK * d)
            .enumerate()
            .map(|(c, out)| {
                let mut worst: f64 = 0.0;
                let mut v = vec![0.0; d];
                for (j, o) in out.chunks_mut(d).enumerate() {
                    let p = c * CHUNK + j;
                    v.copy_from_slice(&qv[p * d..(p + 1) * d]);
                    for k in 0..corners {
                        let (i, w) = (st_idx[p * corners + k], st_w[p * corners + k]);
                        for (vr, hr) in v.iter_mut().zip(&cur[i * d..(i + 1) * d]) {
                            *vr += w * hr;
                        }
                    }
                    for (r, or) in o.iter_mut().enumerate() {
                        *or = map.a_inv[r * d..(r + 1) * d].iter().zip(&v).map(|(a, b)| a * b).sum();
                        worst = worst.max((*or - cur[p * d + r]).abs());
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut cur, &mut next);
        residuals.push(res);
        if !res.is_finite() {
            break;
        }
        if res < config.tol {
            return Ok(ConjugacyField { dim: d, resolution: n, values: cur, residuals });
        }
    }
    Err(ConjugacyError::NoConvergence { budget: config.budget, history: residuals })
}
