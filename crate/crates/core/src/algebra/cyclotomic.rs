use super::poly::RationalPoly;

/// Euler's totient.
pub fn euler_phi(m: u64) -> u64 {
    let mut n = m;
    let mut result = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn divisors(m: u64) -> Vec<u64> {
    (1..=m).filter(|d| m % d == 0).collect()
}

/// The `m`-th cyclotomic polynomial, `m ≥ 1`.
pub fn cyclotomic(m: u64) -> RationalPoly {
    assert!(m >= 1, "cyclotomic index must be positive");
    let mut f = RationalPoly::x_pow_minus_one(m as usize);
    for d in divisors(m) {
        if d < m {
            let (q, r) = f.div_rem(&cyclotomic(d));
            debug_assert!(r.is_zero());
            f = q;
        }
    }
    f
}

/// All `m` with `φ(m) ≤ d`, ascending. These are exactly the orders of
/// roots of unity that can be eigenvalues of a `d × d` rational matrix.
pub fn cyclotomic_indices_up_to_degree(d: usize) -> Vec<u64> {
    // φ(m) ≥ √(m/2), so m ≤ 2d² suffices
    let bound = 2 * (d as u64).pow(2) + 2;
    (1..=bound).filter(|&m| euler_phi(m) <= d as u64).collect()
}
