//! Integer lattices: row Hermite normal form and saturation of rational
//! subspaces.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::rref;

/// Row Hermite normal form `H = U·A` with `U` unimodular. Nonzero rows of
/// `H` come first; the rows of `U` matching zero rows of `H` span the
/// integer left kernel of `A`.
pub fn hnf_with_transform(a: &[Vec<BigInt>], n_cols: usize) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let m = a.len();
    let mut h: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let sub = |rows: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        let s = rows[src].clone();
        for (x, y) in rows[dst].iter_mut().zip(&s) {
            *x -= q * y;
        }
    };
    let mut row = 0;
    for col in 0..n_cols {
        if row == m {
            break;
        }
        loop {
            let piv = (row..m).filter(|&i| !h[i][col].is_zero()).min_by_key(|&i| h[i][col].abs());
            let Some(piv) = piv else { break };
            h.swap(row, piv);
            u.swap(row, piv);
            let mut done = true;
            for i in row + 1..m {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[row][col]);
                sub(&mut h, i, row, &q);
                sub(&mut u, i, row, &q);
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if row == m || h[row][col].is_zero() {
            continue;
        }
        if h[row][col].is_negative() {
            for x in h[row].iter_mut().chain(u[row].iter_mut()) {
                *x = -&*x;
            }
        }
        for i in 0..row {
            let q = h[i][col].div_floor(&h[row][col]);
            if !q.is_zero() {
                sub(&mut h, i, row, &q);
                sub(&mut u, i, row, &q);
            }
        }
        row += 1;
    }
    (h, u)
}

/// Basis of `span_ℚ(vectors) ∩ ℤ^d`, in Hermite normal form.
pub fn saturate(vectors: &[Vec<BigRational>], d: usize) -> Vec<Vec<BigInt>> {
    let mut e: Vec<Vec<BigRational>> = vectors.to_vec();
    let pivots = rref(&mut e);
    let r = pivots.len();
    e.truncate(r);
    if r == 0 {
        return Vec::new();
    }
    // x = c·E lies in ℤ^d iff c = x restricted to the pivots is integral
    // and c·E' ≡ 0 (mod D) with E' = D·E integral
    let den = e.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut stacked: Vec<Vec<BigInt>> =
        e.iter().map(|row| row.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect()).collect();
    for i in 0..d {
        stacked.push((0..d).map(|j| if i == j { den.clone() } else { BigInt::zero() }).collect());
    }
    let (h, u) = hnf_with_transform(&stacked, d);
    let zero_from = h.iter().position(|row| row.iter().all(Zero::is_zero)).unwrap_or(h.len());
    let cs: Vec<Vec<BigInt>> = u[zero_from..].iter().map(|row| row[..r].to_vec()).collect();
    let (hc, _) = hnf_with_transform(&cs, r);
    hc.into_iter()
        .filter(|c| c.iter().any(|x| !x.is_zero()))
        .map(|c| {
            (0..d)
                .map(|j| {
                    let s: BigRational = c.iter().zip(&e).map(|(ci, row)| BigRational::from_integer(ci.clone()) * &row[j]).sum();
                    s.to_integer()
                })
                .collect()
        })
        .collect()
}
