//! Weyl chambers, expanding elements and the max-exponent lower bound.

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use num_rational::Ratio;

use super::{ratio_f64, LyapunovFunctional, LyapunovSpectrum, Place, SpectraError};

/// Short vectors up to this sup norm are searched for chamber representatives.
const REPRESENTATIVE_SEARCH: i64 = 64;
/// Kernel rays closer than this (radians) are treated as one line.
const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChamberRestriction {
    AllPlaces,
    /// Only real functionals cut the plane ("real" Weyl chambers).
    RealOnly,
}

/// A boundary ray of a rank-two chamber. `exact` is set when the ray is
/// the kernel of a p-adic functional, whose slopes are rational.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRay {
    pub direction: [f64; 2],
    pub exact: Option<[i64; 2]>,
}

/// An open chamber: `signs[j]` is the sign of functional `functionals[j]`
/// (an index into the spectrum) throughout the chamber.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylChamber {
    pub functionals: Vec<usize>,
    pub signs: Vec<i8>,
    pub representative: Vec<i64>,
    /// Clockwise then counterclockwise boundary (empty for rank one).
    pub rays: Vec<BoundaryRay>,
}

fn cutting(spectrum: &LyapunovSpectrum, restrict: ChamberRestriction) -> Vec<usize> {
    spectrum
        .functionals
        .iter()
        .enumerate()
        .filter(|(_, f)| restrict == ChamberRestriction::AllPlaces || f.place == Place::Real)
        .filter(|(_, f)| !f.is_zero(spectrum.tol))
        .map(|(i, _)| i)
        .collect()
}

/// Direction vector of a functional for kernel geometry: exact slopes when
/// available (the sign flip from `−log p` is irrelevant for kernels).
fn normal(f: &LyapunovFunctional) -> [f64; 2] {
    match &f.slopes {
        Some(s) => [ratio_f64(&s[0]), ratio_f64(&s[1])],
        None => [f.values[0], f.values[1]],
    }
}

fn exact_kernel(f: &LyapunovFunctional) -> Option<[i64; 2]> {
    let s: &Vec<Ratio<i64>> = f.slopes.as_ref()?;
    let l = s[0].denom().lcm(s[1].denom());
    let (x, y) = (-(s[1] * l).to_integer(), (s[0] * l).to_integer());
    let g = x.gcd(&y).max(1);
    Some([x / g, y / g])
}

/// Weyl chambers of a rank one or rank two spectrum, sorted by angle.
pub fn weyl_chambers(spectrum: &LyapunovSpectrum, restrict: ChamberRestriction) -> Result<Vec<WeylChamber>, SpectraError> {
    let active = cutting(spectrum, restrict);
    if active.is_empty() {
        return Err(SpectraError::RankDeficient);
    }
    let signs_at = |a: &[i64]| -> Vec<i8> { active.iter().map(|&i| spectrum.functionals[i].sign_at(a, spectrum.tol)).collect() };
    match spectrum.rank {
        1 => Ok([1i64, -1]
            .iter()
            .map(|&x| WeylChamber { functionals: active.clone(), signs: signs_at(&[x]), representative: vec![x], rays: vec![] })
            .collect()),
        2 => chambers_rank_two(spectrum, &active),
        k => Err(SpectraError::UnsupportedRank(k)),
    }
}

fn chambers_rank_two(spectrum: &LyapunovSpectrum, active: &[usize]) -> Result<Vec<WeylChamber>, SpectraError> {
    let mut rays: Vec<(f64, BoundaryRay)> = Vec::new();
    for &i in active {
        let f = &spectrum.functionals[i];
        let [c1, c2] = normal(f);
        let exact = exact_kernel(f);
        for sgn in [1.0, -1.0] {
            let d = [-c2 * sgn, c1 * sgn];
            let n = d[0].hypot(d[1]);
            let dir = [d[0] / n, d[1] / n];
            let ex = exact.map(|[x, y]| if sgn > 0.0 { [x, y] } else { [-x, -y] });
            rays.push((dir[1].atan2(dir[0]), BoundaryRay { direction: dir, exact: ex }));
        }
    }
    rays.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut unique: Vec<(f64, BoundaryRay)> = Vec::new();
    for (angle, ray) in rays {
        match unique.last_mut() {
            Some((a, r)) if angle - *a < ANGLE_TOL => {
                if r.exact.is_none() {
                    r.exact = ray.exact;
                }
            }
            _ => unique.push((angle, ray)),
        }
    }
    if unique.len() > 1 && unique[0].0 + 2.0 * std::f64::consts::PI - unique.last().unwrap().0 < ANGLE_TOL {
        unique.pop();
    }

    let mut out = Vec::with_capacity(unique.len());
    for j in 0..unique.len() {
        let (a0, r0) = &unique[j];
        let (a1, r1) = &unique[(j + 1) % unique.len()];
        let end = if j + 1 == unique.len() { a1 + 2.0 * std::f64::consts::PI } else { *a1 };
        let mid = 0.5 * (a0 + end);
        let u = [mid.cos(), mid.sin()];
        let signs: Vec<i8> = active
            .iter()
            .map(|&i| {
                let f = &spectrum.functionals[i];
                let v = match &f.slopes {
                    Some(s) => -(ratio_f64(&s[0]) * u[0] + ratio_f64(&s[1]) * u[1]),
                    None => f.eval_real(&u),
                };
                if v > 0.0 { 1 } else { -1 }
            })
            .collect();
        let representative = representative(spectrum, active, &signs, u).ok_or(SpectraError::IllConditioned)?;
        out.push(WeylChamber {
            functionals: active.to_vec(),
            signs,
            representative,
            rays: vec![r0.clone(), r1.clone()],
        });
    }
    Ok(out)
}

/// Shortest (sup norm, then lexicographic) integer vector with the given
/// strict signs, falling back to scaled roundings of the bisector `u`.
fn representative(spectrum: &LyapunovSpectrum, active: &[usize], signs: &[i8], u: [f64; 2]) -> Option<Vec<i64>> {
    let ok = |a: &[i64]| active.iter().zip(signs).all(|(&i, &s)| spectrum.functionals[i].sign_at(a, spectrum.tol) == s);
    for n in 1..=REPRESENTATIVE_SEARCH {
        for x in -n..=n {
            for y in -n..=n {
                if x.abs().max(y.abs()) == n && ok(&[x, y]) {
                    return Some(vec![x, y]);
                }
            }
        }
    }
    let mut scale = 1e3;
    while scale < 1e15 {
        let a = [(u[0] * scale).round() as i64, (u[1] * scale).round() as i64];
        if ok(&a) {
            return Some(a.to_vec());
        }
        scale *= 10.0;
    }
    None
}

/// Sign of every functional of the spectrum at `a` (any rank).
pub fn sign_vector(spectrum: &LyapunovSpectrum, a: &[i64]) -> Vec<i8> {
    spectrum.functionals.iter().map(|f| f.sign_at(a, spectrum.tol)).collect()
}

/// All nonzero `a` with `‖a‖∞ ≤ bound` on which every real functional is
/// strictly positive, in lexicographic order.
pub fn expanding_elements(spectrum: &LyapunovSpectrum, bound: u64) -> Vec<Vec<i64>> {
    let b = bound as i64;
    let k = spectrum.rank;
    let mut out = Vec::new();
    let mut a = vec![-b; k];
    loop {
        if a.iter().any(|&x| x != 0) && spectrum.at_place(Place::Real).all(|f| f.sign_at(&a, spectrum.tol) == 1) {
            out.push(a.clone());
        }
        // odometer increment
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if a[i] < b {
                a[i] += 1;
                break;
            }
            a[i] = -b;
        }
    }
}

/// `inf_{‖a‖∞ = 1} max_χ |χ(a)|` over all places. The objective is convex
/// and piecewise linear, so the minimum is attained at a vertex cut out on a
/// facet `a_m = ±1` by the breakpoint hyperplanes `χ_i = ±χ_j`, `χ_i = 0`
/// and the other facets.
pub fn min_expansion_rate(spectrum: &LyapunovSpectrum) -> Result<f64, SpectraError> {
    let k = spectrum.rank;
    let mut chis: Vec<Vec<f64>> = Vec::new();
    for f in &spectrum.functionals {
        if f.is_zero(spectrum.tol) {
            continue;
        }
        if !chis.iter().any(|c| c.iter().zip(&f.values).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))) {
            chis.push(f.values.clone());
        }
    }
    if chis.is_empty() {
        return Err(SpectraError::RankDeficient);
    }
    let objective = |a: &[f64]| chis.iter().map(|c| c.iter().zip(a).map(|(x, y)| x * y).sum::<f64>().abs()).fold(0.0, f64::max);

    // candidate hyperplanes h·a = rhs
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (i, ci) in chis.iter().enumerate() {
        planes.push((ci.clone(), 0.0));
        for cj in &chis[i + 1..] {
            planes.push((ci.iter().zip(cj).map(|(x, y)| x - y).collect(), 0.0));
            planes.push((ci.iter().zip(cj).map(|(x, y)| x + y).collect(), 0.0));
        }
    }
    let mut best = f64::INFINITY;
    for m in 0..k {
        for side in [1.0, -1.0] {
            let mut facet_planes = planes.clone();
            for l in (0..k).filter(|&l| l != m) {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; k];
                    e[l] = 1.0;
                    facet_planes.push((e, s));
                }
            }
            for subset in choose(facet_planes.len(), k - 1) {
                let mut mat = DMatrix::zeros(k, k);
                let mut rhs = DVector::zeros(k);
                mat[(0, m)] = 1.0;
                rhs[0] = side;
                for (row, &pi) in subset.iter().enumerate() {
                    for c in 0..k {
                        mat[(row + 1, c)] = facet_planes[pi].0[c];
                    }
                    rhs[row + 1] = facet_planes[pi].1;
                }
                let Some(sol) = mat.lu().solve(&rhs) else { continue };
                if sol.iter().any(|x| !x.is_finite() || x.abs() > 1.0 + 1e-9) {
                    continue;
                }
                best = best.min(objective(sol.as_slice()));
            }
        }
    }
    Ok(best)
}

fn choose(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(values: &[f64]) -> LyapunovFunctional {
        LyapunovFunctional { place: Place::Real, values: values.to_vec(), multiplicity: 1, slopes: None }
    }

    fn spec(rank: usize, fs: Vec<LyapunovFunctional>) -> LyapunovSpectrum {
        LyapunovSpectrum::from_functionals(rank, fs.len(), fs, 1e-8)
    }

    #[test]
    fn chamber_counts() {
        let s = spec(2, vec![real(&[1.0, 0.0]), real(&[0.0, 1.0])]);
        assert_eq!(s.chambers.len(), 4);
        let s = spec(2, vec![real(&[1.0, 0.0]), real(&[0.0, 1.0]), real(&[1.0, 1.0])]);
        assert_eq!(s.chambers.len(), 6);
        let s = spec(2, vec![real(&[1.0, 1.0])]);
        assert_eq!(s.chambers.len(), 2);
        let zero = spec(2, vec![real(&[0.0, 0.0])]);
        assert_eq!(weyl_chambers(&zero, ChamberRestriction::AllPlaces), Err(SpectraError::RankDeficient));
    }

    #[test]
    fn opposite_functionals_share_lines() {
        let s = spec(2, vec![real(&[1.0, 2.0]), real(&[-1.0, -2.0])]);
        assert_eq!(s.chambers.len(), 2);
    }

    #[test]
    fn padic_rays_are_exact_and_real_only_ignores_them() {
        let lp = 2f64.ln();
        let padic = LyapunovFunctional {
            place: Place::Prime(2),
            values: vec![-lp / 2.0, -lp],
            multiplicity: 1,
            slopes: Some(vec![Ratio::new(1, 2), Ratio::new(1, 1)]),
        };
        let s = spec(2, vec![real(&[1.0, 0.0]), padic]);
        assert_eq!(s.chambers.len(), 4);
        assert!(s.chambers.iter().flat_map(|c| &c.rays).any(|r| r.exact == Some([-2, 1])));
        let real_only = weyl_chambers(&s, ChamberRestriction::RealOnly).unwrap();
        assert_eq!(real_only.len(), 2);
    }

    #[test]
    fn expansion_examples() {
        let s = spec(2, vec![real(&[1.0, 0.0]), real(&[0.0, 1.0])]);
        assert!((min_expansion_rate(&s).unwrap() - 1.0).abs() < 1e-12);
        let one = spec(1, vec![real(&[0.7])]);
        assert!((min_expansion_rate(&one).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(min_expansion_rate(&spec(2, vec![real(&[0.0, 0.0])])), Err(SpectraError::RankDeficient));
    }

    #[test]
    fn expanding_examples() {
        let doubling = spec(1, vec![real(&[2f64.ln()])]);
        assert_eq!(expanding_elements(&doubling, 3), vec![vec![1], vec![2], vec![3]]);
        let cat = spec(1, vec![real(&[0.9624]), real(&[-0.9624])]);
        assert!(expanding_elements(&cat, 5).is_empty());
        let diag = spec(1, vec![real(&[2f64.ln()]), real(&[3f64.ln()])]);
        assert_eq!(expanding_elements(&diag, 2), vec![vec![1], vec![2]]);
    }

    /// Oracle for the expansion rate: dense sampling of the unit sphere.
    fn sampled_rate(fs: &[Vec<f64>]) -> f64 {
        let n = 4000;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            for a in [[1.0, t], [-1.0, t], [t, 1.0], [t, -1.0]] {
                let v = fs.iter().map(|c| (c[0] * a[0] + c[1] * a[1]).abs()).fold(0.0, f64::max);
                best = best.min(v);
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn representatives_are_sound(fs in proptest::collection::vec((-5i32..=5, -5i32..=5), 1..5)) {
            let fs: Vec<LyapunovFunctional> = fs.iter().map(|&(x, y)| real(&[x as f64 * 0.37, y as f64 * 0.53])).collect();
            prop_assume!(fs.iter().any(|f| !f.is_zero(1e-8)));
            let s = spec(2, fs);
            prop_assert!(!s.chambers.is_empty());
            for c in &s.chambers {
                prop_assert!(c.signs.iter().all(|&x| x != 0));
                for (&i, &sg) in c.functionals.iter().zip(&c.signs) {
                    prop_assert_eq!(s.functionals[i].sign_at(&c.representative, 1e-8), sg);
                }
            }
        }

        #[test]
        fn rate_matches_sampling_and_spanning(fs in proptest::collection::vec((-4i32..=4, -4i32..=4), 1..5)) {
            prop_assume!(fs.iter().all(|&(x, y)| x != 0 || y != 0));
            let vals: Vec<Vec<f64>> = fs.iter().map(|&(x, y)| vec![x as f64, y as f64 * 0.75]).collect();
            let s = spec(2, vals.iter().map(|v| real(v)).collect());
            let r = min_expansion_rate(&s).unwrap();
            // positive exactly when the functionals span the dual plane
            let spans = vals.iter().any(|u| vals.iter().any(|v| u[0] * v[1] - u[1] * v[0] != 0.0));
            prop_assert_eq!(r > 1e-12, spans);
            let sampled = sampled_rate(&vals);
            prop_assert!(r <= sampled + 1e-9);
            prop_assert!(sampled - r < 5e-3 * (1.0 + sampled));
        }
    }
}
