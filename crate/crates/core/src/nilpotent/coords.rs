use num_rational::BigRational;
use num_traits::Zero;

use super::{spans, NilElement, NilError, NilStructure};
use crate::algebra::field::{self, rank, solve};

/// A subspace of the Lie algebra (basis vectors as rows) tagged by a real
/// functional, typically a Lyapunov exponent vector.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedSubspace<F> {
    pub tag: Vec<f64>,
    pub basis: Vec<Vec<F>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketVerdict {
    pub holds: bool,
    /// Pairs `(i, j)`, `i ≤ j`, whose bracket escapes the subspace tagged by
    /// the sum of their tags.
    pub violations: Vec<(usize, usize)>,
}

fn tags_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Checks `[σ^a, σ^b] ⊆ σ^{a+b}` for every pair of tagged pieces, where a
/// missing `σ^{a+b}` means the bracket must vanish. Tags are compared with
/// tolerance `tol`; the span tests themselves are exact.
pub fn bracket_inclusion_check<F: field::Field>(
    s: &NilStructure,
    splitting: &[TaggedSubspace<F>],
    tol: f64,
) -> Result<BracketVerdict, NilError> {
    let d = s.dim();
    let all: Vec<Vec<F>> = splitting.iter().flat_map(|t| t.basis.iter().cloned()).collect();
    if all.iter().any(|v| v.len() != d) {
        return Err(NilError::DimensionMismatch { expected: d, found: all.iter().map(Vec::len).find(|&l| l != d).unwrap_or(0) });
    }
    if all.len() != d || rank(&all) != d {
        return Err(NilError::SplittingNotDirect);
    }
    let mut violations = Vec::new();
    for i in 0..splitting.len() {
        for j in i..splitting.len() {
            let sum: Vec<f64> = splitting[i].tag.iter().zip(&splitting[j].tag).map(|(a, b)| a + b).collect();
            let target: Vec<Vec<F>> = splitting
                .iter()
                .filter(|t| tags_match(&t.tag, &sum, tol))
                .flat_map(|t| t.basis.iter().cloned())
                .collect();
            let ok = splitting[i].basis.iter().all(|u| {
                splitting[j].basis.iter().all(|v| {
                    let b = s.bracket(u, v);
                    if target.is_empty() {
                        b.iter().all(field::Field::is_zero)
                    } else {
                        spans(&target, &b)
                    }
                })
            });
            if !ok {
                violations.push((i, j));
            }
        }
    }
    Ok(BracketVerdict { holds: violations.is_empty(), violations })
}

/// `g = u·v·w` with `u ∈ exp(g^u)`, `v ∈ exp(σ)`, `w ∈ exp(g^ss)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UvsParts {
    pub u: NilElement,
    pub v: NilElement,
    pub ss: NilElement,
}

const UVS_ROUNDS: usize = 16;

/// Splits `g` along the subalgebra triple `(g^u, σ, g^ss)`.
///
/// In step two, `log(u·v·w) = u + v + w + ½([u,v] + [u,w] + [v,w])`. The
/// triple is found by iterating `(u, v, w) ← proj(log g − ½(…))`, which
/// terminates after two rounds whenever the splitting is compatible with
/// `[N, N]`; the answer is then confirmed by exact recomposition.
pub fn uvs_decompose(
    s: &NilStructure,
    subspaces: [&[Vec<BigRational>]; 3],
    g: &NilElement,
) -> Result<UvsParts, NilError> {
    let d = s.dim();
    if g.dim() != d {
        return Err(NilError::DimensionMismatch { expected: d, found: g.dim() });
    }
    for (idx, sub) in subspaces.iter().enumerate() {
        if let Some(v) = sub.iter().find(|v| v.len() != d) {
            return Err(NilError::DimensionMismatch { expected: d, found: v.len() });
        }
        let closed = sub.iter().all(|a| sub.iter().all(|b| spans(sub, &s.bracket(a, b))));
        if !closed {
            return Err(NilError::NotSubalgebra(idx));
        }
    }
    let all: Vec<Vec<BigRational>> = subspaces.iter().flat_map(|b| b.iter().cloned()).collect();
    if all.len() != d || rank(&all) != d {
        return Err(NilError::NotDirectSum);
    }
    // columns are the concatenated basis vectors
    let m: Vec<Vec<BigRational>> = (0..d).map(|r| all.iter().map(|v| v[r].clone()).collect()).collect();
    let ranges = {
        let a = subspaces[0].len();
        let b = a + subspaces[1].len();
        [0..a, a..b, b..d]
    };
    let project = |x: &[BigRational]| -> [Vec<BigRational>; 3] {
        let c = solve(&m, x).expect("direct sum");
        ranges.clone().map(|r| {
            let mut out = vec![BigRational::zero(); d];
            for k in r {
                for (o, e) in out.iter_mut().zip(&all[k]) {
                    *o += &c[k] * e;
                }
            }
            out
        })
    };
    let half = BigRational::new(1.into(), 2.into());
    let x = g.coords();
    let mut parts = project(x);
    for _ in 0..UVS_ROUNDS {
        let [u, v, w] = &parts;
        let cross: Vec<BigRational> = (0..d)
            .map(|k| &half * (&s.bracket(u, v)[k] + &s.bracket(u, w)[k] + &s.bracket(v, w)[k]))
            .collect();
        let shifted: Vec<BigRational> = x.iter().zip(&cross).map(|(a, b)| a - b).collect();
        let next = project(&shifted);
        if next == parts {
            break;
        }
        parts = next;
    }
    let [u, v, w] = parts;
    let out = UvsParts { u: g.with_values(u)?, v: g.with_values(v)?, ss: g.with_values(w)? };
    let back = super::nil_mul(s, &super::nil_mul(s, &out.u, &out.v)?, &out.ss);
    if back.as_ref().map(|b| b.coords() != g.coords()).unwrap_or(true) {
        return Err(NilError::DecompositionFailed);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::Quadratic;
    use crate::nilpotent::nil_mul;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn e(d: usize, i: usize) -> Vec<BigRational> {
        (0..d).map(|j| q((i == j) as i64)).collect()
    }

    fn heisenberg_triple() -> [Vec<Vec<BigRational>>; 3] {
        [vec![e(3, 0)], vec![e(3, 1)], vec![e(3, 2)]]
    }

    fn as_refs(t: &[Vec<Vec<BigRational>>; 3]) -> [&[Vec<BigRational>]; 3] {
        [&t[0], &t[1], &t[2]]
    }

    /// Eigenvectors `(1, (−1 ± √5)/2, 0)` of the cat map `[[2,1],[1,1]]`
    /// acting on the first two coordinates, the centre spanned by `f_3`.
    fn cat_splitting(centre_tag: f64) -> Vec<TaggedSubspace<Quadratic>> {
        let half = BigRational::new(1.into(), 2.into());
        let r = |n: i64| Quadratic::rational(q(n), 5);
        let chi = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let v = |sign: i64| vec![r(1), Quadratic::new(-half.clone(), &half * q(sign), 5), r(0)];
        vec![
            TaggedSubspace { tag: vec![chi], basis: vec![v(1)] },
            TaggedSubspace { tag: vec![-chi], basis: vec![v(-1)] },
            TaggedSubspace { tag: vec![centre_tag], basis: vec![vec![r(0), r(0), r(1)]] },
        ]
    }

    #[test]
    fn cat_map_brackets() {
        let s = NilStructure::heisenberg();
        let verdict = bracket_inclusion_check(&s, &cat_splitting(0.0), 1e-9).unwrap();
        assert_eq!(verdict, BracketVerdict { holds: true, violations: vec![] });
        let wrong = bracket_inclusion_check(&s, &cat_splitting(1.0), 1e-9).unwrap();
        assert!(!wrong.holds);
        assert_eq!(wrong.violations, vec![(0, 1)]);
    }

    #[test]
    fn abelian_brackets_vanish() {
        let s = NilStructure::abelian(2);
        let split = vec![
            TaggedSubspace { tag: vec![1.0], basis: vec![e(2, 0)] },
            TaggedSubspace { tag: vec![7.0], basis: vec![e(2, 1)] },
        ];
        assert!(bracket_inclusion_check(&s, &split, 1e-9).unwrap().holds);
        assert_eq!(bracket_inclusion_check(&s, &split[..1], 1e-9), Err(NilError::SplittingNotDirect));
    }

    #[test]
    fn heisenberg_decomposition() {
        let s = NilStructure::heisenberg();
        let t = heisenberg_triple();
        let parts = uvs_decompose(&s, as_refs(&t), &NilElement::integer(&[1, 1, 0])).unwrap();
        assert_eq!(parts.u, NilElement::integer(&[1, 0, 0]));
        assert_eq!(parts.v, NilElement::integer(&[0, 1, 0]));
        assert_eq!(parts.ss, NilElement::integer(&[0, 0, -1]));

        let g = NilElement::integer(&[0, 5, 0]);
        let parts = uvs_decompose(&s, as_refs(&t), &g).unwrap();
        assert!(parts.u.is_identity() && parts.ss.is_identity());
        assert_eq!(parts.v, g);
    }

    #[test]
    fn abelian_is_linear_projection() {
        let s = NilStructure::abelian(2);
        let t = [vec![vec![q(1), q(1)]], vec![vec![q(1), q(-1)]], vec![]];
        let parts = uvs_decompose(&s, as_refs(&t), &NilElement::integer(&[3, 1])).unwrap();
        assert_eq!(parts.u, NilElement::integer(&[2, 2]));
        assert_eq!(parts.v, NilElement::integer(&[1, -1]));
        assert!(parts.ss.is_identity());
    }

    #[test]
    fn decomposition_errors() {
        let s = NilStructure::heisenberg();
        let g = NilElement::integer(&[1, 1, 1]);
        let t = [vec![e(3, 0), e(3, 1)], vec![], vec![e(3, 2)]];
        assert_eq!(uvs_decompose(&s, as_refs(&t), &g), Err(NilError::NotSubalgebra(0)));
        let t = [vec![e(3, 0)], vec![e(3, 0)], vec![e(3, 2)]];
        assert_eq!(uvs_decompose(&s, as_refs(&t), &g), Err(NilError::NotDirectSum));
    }

    proptest! {
        #[test]
        fn recomposition_is_exact(x in proptest::collection::vec(-20i64..=20, 3), a in -3i64..=3) {
            let s = NilStructure::heisenberg();
            // a sheared unstable direction still works because the centre is its own piece
            let t = [vec![vec![q(1), q(a), q(0)]], vec![e(3, 1)], vec![e(3, 2)]];
            let g = NilElement::integer(&x);
            let p = uvs_decompose(&s, as_refs(&t), &g).unwrap();
            let back = nil_mul(&s, &nil_mul(&s, &p.u, &p.v).unwrap(), &p.ss).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn centre_stable_projection(x in proptest::collection::vec(-20i64..=20, 3), y in -20i64..=20, z in -20i64..=20) {
            let s = NilStructure::heisenberg();
            let t = heisenberg_triple();
            let g1 = NilElement::integer(&x);
            let g2 = NilElement::integer(&[0, y, z]);
            let prod = nil_mul(&s, &g1, &g2).unwrap();
            let lhs = uvs_decompose(&s, as_refs(&t), &prod).unwrap().v;
            let v1 = uvs_decompose(&s, as_refs(&t), &g1).unwrap().v;
            let v2 = uvs_decompose(&s, as_refs(&t), &g2).unwrap().v;
            prop_assert_eq!(lhs, nil_mul(&s, &v1, &v2).unwrap());
        }
    }
}
