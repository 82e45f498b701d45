//! The p-adic places. Single matrices are read off the Newton polygon of the
//! exact characteristic polynomial; joint functionals come from splitting
//! ℤ_p-lattices into slope subspaces modulo `p^K`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use super::{ratio_f64, SpectraError};
use crate::algebra::hensel::{hensel_lift_zp, ZpPoly};
use crate::algebra::padic::{mod_inverse, p_pow, vp_int};
use crate::algebra::{charpoly, newton_polygon, newton_polygon_truncated, FpPoly, IntMatrix, Valuation};

/// Starting precision for slope splitting.
pub const DEFAULT_PRECISION: u32 = 20;
/// Precision is doubled on exhaustion up to this bound.
pub const MAX_PRECISION: u32 = 160;

/// One p-adic exponent of a single matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicExponent {
    /// Common valuation of the eigenvalues.
    pub slope: Ratio<i64>,
    /// `−slope·log p`.
    pub value: f64,
    pub multiplicity: usize,
}

/// Exponents `−v_p(λ)·log p` of a nonsingular integer matrix, largest first.
pub fn padic_lyapunov(a: &IntMatrix, p: u64) -> Result<Vec<PadicExponent>, SpectraError> {
    let np = newton_polygon(&charpoly(a), p)?;
    if np.zero_roots > 0 {
        return Err(SpectraError::SingularGenerator(0));
    }
    let lp = (p as f64).ln();
    let mut out: Vec<PadicExponent> = np
        .slopes
        .iter()
        .map(|&(s, m)| PadicExponent { slope: s, value: -ratio_f64(&s) * lp, multiplicity: m })
        .collect();
    out.sort_by(|x, y| x.slope.cmp(&y.slope));
    Ok(out)
}

/// Raised internally when the working precision is too small.
struct Exhausted;

/// Dense matrix over ℤ/p^kℤ, entries in `[0, p^k)`.
#[derive(Clone, Debug, PartialEq)]
struct ZpMat {
    p: u64,
    k: u32,
    rows: usize,
    cols: usize,
    e: Vec<BigInt>,
}

impl ZpMat {
    fn from_fn(p: u64, k: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let m = p_pow(p, k);
        let mut e = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                e.push(f(i, j).mod_floor(&m));
            }
        }
        ZpMat { p, k, rows, cols, e }
    }

    fn from_int(a: &IntMatrix, p: u64, k: u32) -> Self {
        Self::from_fn(p, k, a.dim(), a.dim(), |i, j| a[(i, j)].clone())
    }

    fn identity(p: u64, k: u32, n: usize) -> Self {
        Self::from_fn(p, k, n, n, |i, j| if i == j { BigInt::one() } else { BigInt::zero() })
    }

    fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.e[i * self.cols + j]
    }

    fn reduce(&self, k: u32) -> Self {
        Self::from_fn(self.p, k.min(self.k), self.rows, self.cols, |i, j| self.at(i, j).clone())
    }

    fn mul(&self, o: &Self) -> Self {
        let k = self.k.min(o.k);
        Self::from_fn(self.p, k, self.rows, o.cols, |i, j| {
            (0..self.cols).map(|t| self.at(i, t) * o.at(t, j)).sum()
        })
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.p, self.k, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `f(self)` by Horner's rule, at the smaller of the two precisions.
    fn eval_poly(&self, f: &ZpPoly) -> Self {
        let k = self.k.min(f.precision());
        let m = self.reduce(k);
        let mut acc = Self::from_fn(self.p, k, self.rows, self.cols, |_, _| BigInt::zero());
        for c in f.coeffs().iter().rev() {
            acc = acc.mul(&m);
            for i in 0..self.rows {
                let idx = i * self.cols + i;
                acc.e[idx] = (&acc.e[idx] + c).mod_floor(&p_pow(self.p, k));
            }
        }
        acc
    }
}

/// Characteristic polynomial by Berkowitz's division-free recurrence,
/// ascending coefficients modulo `p^k`.
fn berkowitz(a: &ZpMat) -> Vec<BigInt> {
    let n = a.rows;
    let m = p_pow(a.p, a.k);
    // descending coefficients of the characteristic polynomial of the
    // trailing principal submatrix
    let mut poly = vec![BigInt::one()];
    for r in (0..n).rev() {
        let s = n - r - 1;
        let mut q = vec![BigInt::zero(); s + 2];
        q[0] = BigInt::one();
        q[1] = (-a.at(r, r)).mod_floor(&m);
        let mut v: Vec<BigInt> = (r + 1..n).map(|i| a.at(i, r).clone()).collect();
        for j in 0..s {
            let rv: BigInt = (r + 1..n).zip(&v).map(|(c, x)| a.at(r, c) * x).sum();
            q[j + 2] = (-rv).mod_floor(&m);
            v = (r + 1..n)
                .map(|i| (r + 1..n).zip(&v).map(|(c, x)| a.at(i, c) * x).sum::<BigInt>().mod_floor(&m))
                .collect();
        }
        let mut next = vec![BigInt::zero(); s + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for (j, c) in poly.iter().enumerate().take(i + 1) {
                acc += &q[i - j] * c;
            }
            *slot = acc.mod_floor(&m);
        }
        poly = next;
    }
    poly.reverse();
    poly
}

fn truncated_valuation(x: &BigInt, p: u64, k: u32) -> Valuation {
    match vp_int(x, p) {
        Some(v) if v < k => Valuation::Finite(v),
        _ => Valuation::AtLeast(k),
    }
}

/// Primitive basis of the image of `x` (assumed of rank `rank`) by column
/// elimination with minimal-valuation pivots. Returns the basis, its pivot
/// rows in pivot order (the pivot submatrix is lower triangular with unit
/// diagonal) and its precision.
fn image_basis(x: &ZpMat, rank: usize) -> Result<(ZpMat, Vec<usize>), Exhausted> {
    let (p, k) = (x.p, x.k);
    let m = p_pow(p, k);
    let mut cols: Vec<Vec<BigInt>> = (0..x.cols).map(|j| (0..x.rows).map(|i| x.at(i, j).clone()).collect()).collect();
    let mut used_rows = vec![false; x.rows];
    let mut used_cols = vec![false; x.cols];
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots = Vec::new();
    let mut loss = 0;
    for _ in 0..rank {
        let mut best: Option<(u32, usize, usize)> = None;
        for (j, col) in cols.iter().enumerate() {
            if used_cols[j] {
                continue;
            }
            for (i, v) in col.iter().enumerate() {
                if used_rows[i] {
                    continue;
                }
                if let Some(val) = vp_int(v, p) {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let (v, pi, pj) = best.ok_or(Exhausted)?;
        if v >= k {
            return Err(Exhausted);
        }
        let pv = p_pow(p, v);
        let unit = &cols[pj][pi] / &pv;
        let unit_inv = mod_inverse(&unit, &m).ok_or(Exhausted)?;
        let pivot_col = cols[pj].clone();
        for j in 0..cols.len() {
            if used_cols[j] || j == pj {
                continue;
            }
            let entry = &cols[j][pi];
            if entry.is_zero() {
                continue;
            }
            let (q, r) = entry.div_rem(&pv);
            if !r.is_zero() {
                return Err(Exhausted);
            }
            let factor = (q * &unit_inv).mod_floor(&m);
            for (c, b) in cols[j].iter_mut().zip(&pivot_col) {
                *c = (&*c - &factor * b).mod_floor(&m);
            }
        }
        let mut vec = Vec::with_capacity(x.rows);
        for c in &pivot_col {
            let (q, r) = c.div_rem(&pv);
            if !r.is_zero() {
                return Err(Exhausted);
            }
            vec.push(q);
        }
        basis.push(vec);
        pivots.push(pi);
        used_rows[pi] = true;
        used_cols[pj] = true;
        loss = loss.max(v);
    }
    if loss >= k {
        return Err(Exhausted);
    }
    let kb = k - loss;
    let b = ZpMat::from_fn(p, kb, x.rows, rank, |i, j| basis[j][i].clone());
    Ok((b, pivots))
}

/// Matrix of `r` on the invariant lattice spanned by `b`: solves
/// `b_P · r' = (r·b)_P` on the pivot rows by forward substitution and checks
/// the remaining rows.
fn restrict(r: &ZpMat, b: &ZpMat, pivots: &[usize]) -> Result<ZpMat, Exhausted> {
    let k = b.k;
    let m = p_pow(b.p, k);
    let c = r.reduce(k).mul(b);
    let n = b.cols;
    let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (s, &ps) in pivots.iter().enumerate() {
        let inv = mod_inverse(b.at(ps, s), &m).ok_or(Exhausted)?;
        let row: Vec<BigInt> = (0..n)
            .map(|j| {
                let mut acc = c.at(ps, j).clone();
                for (t, prev) in out.iter().enumerate() {
                    acc -= b.at(ps, t) * &prev[j];
                }
                (acc * &inv).mod_floor(&m)
            })
            .collect();
        out.push(row);
    }
    let restricted = ZpMat::from_fn(b.p, k, n, n, |i, j| out[i][j].clone());
    if b.mul(&restricted) != c {
        return Err(Exhausted);
    }
    Ok(restricted)
}

/// Splits a block (all generators restricted to it) by the Newton slopes of
/// generator `i`, smallest slope first.
fn split_block(gens: Vec<ZpMat>, i: usize) -> Result<Vec<(Ratio<i64>, Vec<ZpMat>)>, Exhausted> {
    let r_mat = &gens[i];
    let (p, k, r) = (r_mat.p, r_mat.k, r_mat.rows);
    let f = berkowitz(r_mat);
    let vals: Vec<Valuation> = f.iter().map(|c| truncated_valuation(c, p, k)).collect();
    let np = newton_polygon_truncated(&vals, p).map_err(|_| Exhausted)?;
    if np.slopes.len() == 1 {
        return Ok(vec![(np.slopes[0].0, gens)]);
    }
    let &(s_min, m_min) = np.slopes.last().unwrap();
    let (a, b) = (*s_min.numer() as u32, *s_min.denom() as u64);
    let m_rest = r - m_min;

    // G(z) = F_b(p^a z) / p^{a r}, where F_b is the characteristic polynomial
    // of R^b; the unit roots of G are the slope-s_min eigenvalues
    let rb = r_mat.pow(b);
    let fb = berkowitz(&rb);
    let shift = a * r as u32;
    if shift >= k {
        return Err(Exhausted);
    }
    let k2 = k - shift;
    let mut g = Vec::with_capacity(r + 1);
    for (j, c) in fb.iter().enumerate() {
        let e = p_pow(p, a * (r - j) as u32);
        let (q, rem) = c.div_rem(&e);
        if !rem.is_zero() {
            return Err(Exhausted);
        }
        g.push(q);
    }
    let g = ZpPoly::new(p, k2, g);
    let gbar = g.to_fp();
    if (0..m_rest).any(|j| gbar.coeff(j) != 0) || gbar.coeff(m_rest) == 0 {
        return Err(Exhausted);
    }
    let unit_part = FpPoly::new(p, gbar.coeffs()[m_rest..].to_vec());
    let z_pow = FpPoly::new(p, {
        let mut c = vec![0; m_rest + 1];
        c[m_rest] = 1;
        c
    });
    let lifted = hensel_lift_zp(&g, &[z_pow, unit_part]).map_err(|_| Exhausted)?;
    let rescale = |poly: &ZpPoly, deg: usize| -> ZpPoly {
        let c = (0..=deg).map(|j| poly.coeff(j) * p_pow(p, a * (deg - j) as u32)).collect();
        ZpPoly::new(p, k2, c)
    };
    let h_plus = rescale(&lifted[0], m_rest);
    let h_zero = rescale(&lifted[1], m_min);

    let (b_min, piv_min) = image_basis(&rb.eval_poly(&h_plus), m_min)?;
    let (b_rest, piv_rest) = image_basis(&rb.eval_poly(&h_zero), m_rest)?;
    let on_min = gens.iter().map(|g| restrict(g, &b_min, &piv_min)).collect::<Result<Vec<_>, _>>()?;
    let on_rest = gens.iter().map(|g| restrict(g, &b_rest, &piv_rest)).collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![(s_min, on_min)];
    out.extend(split_block(on_rest, i)?);
    Ok(out)
}

fn joint_at(gens: &[IntMatrix], p: u64, k: u32) -> Result<Vec<(Vec<Ratio<i64>>, usize)>, Exhausted> {
    let start: Vec<ZpMat> = gens.iter().map(|g| ZpMat::from_int(g, p, k)).collect();
    let mut blocks: Vec<(Vec<Ratio<i64>>, Vec<ZpMat>)> = vec![(Vec::new(), start)];
    for i in 0..gens.len() {
        let mut next = Vec::new();
        for (slopes, mats) in blocks {
            for (s, sub) in split_block(mats, i)? {
                let mut v = slopes.clone();
                v.push(s);
                next.push((v, sub));
            }
        }
        blocks = next;
    }
    Ok(blocks.into_iter().map(|(s, m)| (s, m[0].rows)).collect())
}

/// Joint p-adic functionals as exact slope vectors with multiplicities.
/// Precision starts at [`DEFAULT_PRECISION`] and doubles up to
/// [`MAX_PRECISION`].
pub fn padic_joint(gens: &[IntMatrix], p: u64) -> Result<Vec<(Vec<Ratio<i64>>, usize)>, SpectraError> {
    let d = gens[0].dim();
    let bp = BigInt::from(p);
    if gens.iter().all(|g| !(g.det() % &bp).is_zero()) {
        return Ok(vec![(vec![Ratio::from_integer(0); gens.len()], d)]);
    }
    let mut k = DEFAULT_PRECISION;
    loop {
        match joint_at(gens, p, k) {
            Ok(mut v) => {
                v.sort();
                return Ok(v);
            }
            Err(Exhausted) if k < MAX_PRECISION => k = (2 * k).min(MAX_PRECISION),
            Err(Exhausted) => return Err(SpectraError::PrecisionExhausted(k)),
        }
    }
}
