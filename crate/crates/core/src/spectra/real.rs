//! The real place: eigenvalue moduli from exact square-free factors, joint
//! functionals from images of spectral projector polynomials.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SpectraError;
use crate::algebra::{charpoly, IntMatrix, RationalPoly};

const ABERTH_MAX_ITER: usize = 2000;
/// Singular values of a normalized projector restricted to a block are of
/// order one on its image and at rounding level elsewhere.
const RANK_THRESHOLD: f64 = 1e-6;

/// Complex roots of a nonzero polynomial, with multiplicities taken from the
/// exact square-free decomposition.
pub fn complex_roots(f: &RationalPoly) -> Result<Vec<(Complex64, usize)>, SpectraError> {
    let mut out = Vec::new();
    for (g, m) in f.square_free_decomposition() {
        for z in aberth(&g.to_f64_coeffs())? {
            out.push((z, m));
        }
    }
    Ok(out)
}

/// Simultaneous root iteration on a polynomial with simple roots.
fn aberth(coeffs: &[f64]) -> Result<Vec<Complex64>, SpectraError> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let c: Vec<f64> = coeffs.iter().map(|x| x / lead).collect();
    if n == 1 {
        return Ok(vec![Complex64::new(-c[0], 0.0)]);
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let backward = |z: Complex64| -> f64 {
        let r = z.norm();
        let scale: f64 = c.iter().rev().fold(0.0, |acc, a| acc * r + a.abs());
        eval(z).0.norm() / scale.max(f64::MIN_POSITIVE)
    };
    let radius = c[0].abs().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                z[k] += Complex64::new(1e-8, 1e-8);
                max_step = f64::INFINITY;
                continue;
            }
            z[k] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[k].norm()));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // a couple of Newton polishing steps
    for zk in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = eval(*zk);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.re.is_finite() && step.im.is_finite() {
                    *zk -= step;
                }
            }
        }
    }
    if z.iter().any(|&zk| backward(zk) > 1e-9) {
        return Err(SpectraError::RootFindingFailure);
    }
    Ok(z)
}

/// Roots with equal modulus, within tolerance.
#[derive(Clone, Debug)]
pub(crate) struct ModulusGroup {
    pub value: f64,
    pub multiplicity: usize,
    pub roots: Vec<(Complex64, usize)>,
}

/// Groups roots by `log|λ|`; groups are sorted by decreasing value.
pub(crate) fn modulus_groups(roots: &[(Complex64, usize)], tol: f64) -> Vec<ModulusGroup> {
    let mut items: Vec<(f64, Complex64, usize)> = roots.iter().map(|&(z, m)| (z.norm().ln(), z, m)).collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut groups: Vec<ModulusGroup> = Vec::new();
    let mut anchor = f64::NAN;
    for (v, z, m) in items {
        let same = groups.last().is_some() && (anchor - v).abs() <= tol * anchor.abs().max(1.0);
        if !same {
            anchor = v;
            groups.push(ModulusGroup { value: 0.0, multiplicity: 0, roots: Vec::new() });
        }
        let g = groups.last_mut().unwrap();
        g.roots.push((z, m));
        g.multiplicity += m;
    }
    for g in groups.iter_mut() {
        let total: f64 = g.roots.iter().map(|(z, m)| z.norm().ln() * *m as f64).sum();
        g.value = total / g.multiplicity as f64;
    }
    groups
}

/// Real Lyapunov exponents `log|λ|` of a nonsingular integer matrix with
/// multiplicities, largest first.
pub fn real_lyapunov(a: &IntMatrix, tol: f64) -> Result<Vec<(f64, usize)>, SpectraError> {
    let roots = complex_roots(&charpoly(a))?;
    Ok(modulus_groups(&roots, tol).into_iter().map(|g| (g.value, g.multiplicity)).collect())
}

fn to_complex(a: &IntMatrix) -> DMatrix<Complex64> {
    let rows = a.to_f64_rows();
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| Complex64::new(rows[i][j], 0.0))
}

/// `∏_{μ ∉ G} (A − μ)^{m_μ}`; its image is the sum of the generalized
/// eigenspaces of the roots in `G`. Each factor is divided by the distance
/// from `μ` to `G`, so the product acts on its image with singular values of
/// order one.
fn projector(a: &DMatrix<Complex64>, group: &[(Complex64, usize)], others: &[(Complex64, usize)]) -> DMatrix<f64> {
    let d = a.nrows();
    let mut acc = DMatrix::<Complex64>::identity(d, d);
    for &(mu, m) in others {
        let mut f = a.clone();
        for i in 0..d {
            f[(i, i)] -= mu;
        }
        let dist = group.iter().map(|(l, _)| (l - mu).norm()).fold(f64::INFINITY, f64::min);
        let f = f.unscale(dist.max(f64::MIN_POSITIVE));
        for _ in 0..m {
            acc = &acc * &f;
        }
    }
    acc.map(|z| z.re)
}

/// Orthonormal basis of the column space of `w` by column-pivoted QR, with
/// the magnitudes `|R_ii|` as rank indicators (non-increasing). The SVD's
/// singular vectors proved less accurate here when singular values cluster.
fn image_basis(w: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let qr = w.clone().col_piv_qr();
    let r = qr.r();
    let sv: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    (sv, qr.q())
}

/// Joint real functionals by successive refinement: the subspace attached
/// to each modulus group of generator `i` is intersected with the blocks
/// obtained from generators `0..i`.
pub fn real_joint(gens: &[IntMatrix], tol: f64) -> Result<Vec<(Vec<f64>, usize)>, SpectraError> {
    let d = gens[0].dim();
    // (values so far, orthonormal basis of the block)
    let mut blocks: Vec<(Vec<f64>, DMatrix<f64>)> = vec![(Vec::new(), DMatrix::identity(d, d))];
    for g in gens {
        let roots = complex_roots(&charpoly(g))?;
        let groups = modulus_groups(&roots, tol);
        let ac = to_complex(g);
        let projectors: Vec<DMatrix<f64>> = (0..groups.len())
            .map(|gi| {
                let others: Vec<(Complex64, usize)> = groups
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != gi)
                    .flat_map(|(_, h)| h.roots.iter().copied())
                    .collect();
                projector(&ac, &groups[gi].roots, &others)
            })
            .collect();
        let mut next = Vec::new();
        for (values, basis) in blocks {
            let r = basis.ncols();
            let images: Vec<(Vec<f64>, DMatrix<f64>)> = projectors.iter().map(|pr| image_basis(&(pr * &basis))).collect();
            let ranks: Vec<usize> =
                images.iter().map(|(sv, _)| sv.iter().filter(|&&s| s > RANK_THRESHOLD).count()).collect();
            if ranks.iter().sum::<usize>() != r {
                return Err(SpectraError::IllConditioned);
            }
            for ((group, (_, u)), rank) in groups.iter().zip(images).zip(ranks) {
                if rank == 0 {
                    continue;
                }
                let mut v = values.clone();
                v.push(group.value);
                next.push((v, u.columns(0, rank).into_owned()));
            }
        }
        blocks = next;
    }
    Ok(blocks.into_iter().map(|(v, b)| (v, b.ncols())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    #[test]
    fn examples() {
        let cat = real_lyapunov(&m(&[vec![2, 1], vec![1, 1]]), 1e-8).unwrap();
        let l = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_eq!(cat.len(), 2);
        assert!((cat[0].0 - l).abs() < 1e-12 && (cat[1].0 + l).abs() < 1e-12);
        let rot = real_lyapunov(&m(&[vec![0, -1], vec![1, 0]]), 1e-8).unwrap();
        assert_eq!(rot.len(), 1);
        assert!(rot[0].0.abs() < 1e-14 && rot[0].1 == 2);
        let two = real_lyapunov(&m(&[vec![2]]), 1e-8).unwrap();
        assert!((two[0].0 - 2f64.ln()).abs() < 1e-15 && two[0].1 == 1);
    }

    #[test]
    fn jordan_block_keeps_multiplicity() {
        let r = real_lyapunov(&m(&[vec![2, 1, 0], vec![0, 2, 0], vec![0, 0, 3]]), 1e-8).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].1, 1);
        assert_eq!(r[1].1, 2);
        assert!((r[1].0 - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_joint() {
        let mut j = real_joint(&[m(&[vec![2, 0], vec![0, 3]]), m(&[vec![3, 0], vec![0, 2]])], 1e-8).unwrap();
        j.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
        assert_eq!(j.len(), 2);
        assert!((j[0].0[0] - 2f64.ln()).abs() < 1e-12 && (j[0].0[1] - 3f64.ln()).abs() < 1e-12);
        assert!((j[1].0[0] - 3f64.ln()).abs() < 1e-12 && (j[1].0[1] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn golden_pair() {
        let a = m(&[vec![2, 1], vec![1, 1]]);
        let b = m(&[vec![1, 1], vec![1, 0]]);
        let l = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let j = real_joint(&[a, b], 1e-8).unwrap();
        assert_eq!(j.len(), 2);
        for (v, mult) in j {
            assert_eq!(mult, 1);
            assert!((v[0] - 2.0 * v[1]).abs() < 1e-12);
            assert!((v[1].abs() - l).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_moduli_split_by_second_generator() {
        // A = I ⊕ I is one modulus class; B = diag(2,3) separates it
        let a = m(&[vec![-1, 0], vec![0, 1]]);
        let b = m(&[vec![2, 0], vec![0, 3]]);
        let j = real_joint(&[a, b], 1e-8).unwrap();
        assert_eq!(j.len(), 2);
        assert!(j.iter().all(|(v, m)| v[0].abs() < 1e-12 && *m == 1));
    }
}
