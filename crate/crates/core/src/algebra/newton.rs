//! Newton polygons: p-adic root valuations read from the lower convex hull of
//! `(i, v_p(a_i))`.

use num_rational::Ratio;

use super::padic::{vp_rational, Valuation};
use super::poly::RationalPoly;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub p: u64,
    /// Hull vertices `(i, v_p(a_i))` from left to right, after zero roots
    /// are split off (indices are shifted accordingly).
    pub vertices: Vec<(usize, i64)>,
    /// Root valuations with multiplicities, one entry per hull segment, in
    /// hull order (valuations decreasing).
    pub slopes: Vec<(Ratio<i64>, usize)>,
    /// Number of roots equal to zero (infinite valuation).
    pub zero_roots: usize,
}

impl NewtonPolygon {
    /// Root valuations expanded by multiplicity.
    pub fn valuations(&self) -> Vec<Ratio<i64>> {
        self.slopes.iter().flat_map(|&(s, m)| std::iter::repeat_n(s, m)).collect()
    }

    /// Sum of valuation times multiplicity.
    pub fn valuation_sum(&self) -> Ratio<i64> {
        self.slopes.iter().map(|&(s, m)| s * m as i64).sum()
    }

    pub fn degree(&self) -> usize {
        self.zero_roots + self.slopes.iter().map(|&(_, m)| m).sum::<usize>()
    }
}

/// Newton polygon of a nonzero polynomial with rational coefficients.
pub fn newton_polygon(f: &RationalPoly, p: u64) -> Result<NewtonPolygon, AlgebraError> {
    if f.is_zero() {
        return Err(AlgebraError::ZeroPolynomial);
    }
    let c = f.coeffs();
    let zero_roots = c.iter().position(|a| !num_traits::Zero::is_zero(a)).unwrap();
    let points: Vec<(usize, i64)> = c[zero_roots..]
        .iter()
        .enumerate()
        .filter_map(|(i, a)| vp_rational(a, p).map(|v| (i, v)))
        .collect();
    Ok(from_points(p, &points, zero_roots))
}

/// Newton polygon from coefficient valuations known only modulo `p^K`.
/// Unknown coefficients (`AtLeast(K)`) may be anything of valuation ≥ K;
/// fails with `PrecisionExhausted` if such a coefficient could touch the hull.
pub fn newton_polygon_truncated(vals: &[Valuation], p: u64) -> Result<NewtonPolygon, AlgebraError> {
    let n = vals.len();
    if n == 0 || vals[n - 1].finite().is_none() {
        return Err(AlgebraError::PrecisionExhausted);
    }
    if vals[0].finite().is_none() {
        return Err(AlgebraError::PrecisionExhausted);
    }
    let points: Vec<(usize, i64)> =
        vals.iter().enumerate().filter_map(|(i, v)| v.finite().map(|v| (i, v as i64))).collect();
    let poly = from_points(p, &points, 0);
    for (i, v) in vals.iter().enumerate() {
        if let Valuation::AtLeast(k) = v {
            if hull_height(&poly.vertices, i) >= Ratio::from_integer(*k as i64) {
                return Err(AlgebraError::PrecisionExhausted);
            }
        }
    }
    Ok(poly)
}

fn hull_height(vertices: &[(usize, i64)], i: usize) -> Ratio<i64> {
    for w in vertices.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 <= i && i <= x1 {
            return Ratio::from_integer(y0) + Ratio::new((y1 - y0) * (i - x0) as i64, (x1 - x0) as i64);
        }
    }
    Ratio::from_integer(vertices[0].1)
}

fn cross(o: (usize, i64), a: (usize, i64), b: (usize, i64)) -> i128 {
    let (ox, oy) = (o.0 as i128, o.1 as i128);
    (a.0 as i128 - ox) * (b.1 as i128 - oy) - (a.1 as i128 - oy) * (b.0 as i128 - ox)
}

fn from_points(p: u64, points: &[(usize, i64)], zero_roots: usize) -> NewtonPolygon {
    // monotone chain, lower hull
    let mut hull: Vec<(usize, i64)> = Vec::new();
    for &pt in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    let slopes = hull
        .windows(2)
        .map(|w| {
            let (dx, dy) = ((w[1].0 - w[0].0) as i64, w[1].1 - w[0].1);
            (-Ratio::new(dy, dx), dx as usize)
        })
        .collect();
    NewtonPolygon { p, vertices: hull, slopes, zero_roots }
}
