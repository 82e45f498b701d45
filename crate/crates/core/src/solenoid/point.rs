use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DualMode, SolenoidError};
use crate::algebra::padic::{mod_inverse, p_pow, rational_mod_pk, vp_int, vp_rational};
use crate::algebra::{IntMatrix, PadicTruncated, QMatrix};
use crate::spectra::ActionSpec;

/// Real parts of Haar samples lie on the grid `2^-HAAR_GRID_BITS · ℤ^d`.
pub const HAAR_GRID_BITS: u32 = 32;

const CHUNK: usize = 1024;

/// A point of `(ℝ^d × ∏_{p∈S} ℤ_p^d) / ℤ^d`, in the normal form `x ∈ [0,1)^d`.
///
/// The real part is stored as `num / den` with `0 ≤ num_i < den`. Each
/// p-adic part is known modulo `p^e` where `e` is the effective precision
/// of that prime; inverse steps lower `e` and digits are never invented.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolenoidPoint {
    num: Vec<BigInt>,
    den: BigInt,
    primes: Vec<u64>,
    residues: Vec<Vec<BigInt>>,
    effective: Vec<u32>,
    precision: u32,
}

impl SolenoidPoint {
    /// `x` is reduced mod 1, shifting the p-adic parts by the same integer
    /// vector. All p-adic coordinates must share one precision `K`.
    pub fn new(x: &[BigRational], padic: &[(u64, Vec<PadicTruncated>)]) -> Result<Self, SolenoidError> {
        let d = x.len();
        let precision = padic.first().and_then(|(_, v)| v.first()).map_or(1, |t| t.precision());
        let mut primes = Vec::new();
        let mut residues = Vec::new();
        for (p, coords) in padic {
            if coords.len() != d {
                return Err(SolenoidError::DimensionMismatch { expected: d, found: coords.len() });
            }
            if coords.iter().any(|t| t.prime() != *p || t.precision() != precision) {
                return Err(SolenoidError::InconsistentPadic { prime: *p });
            }
            primes.push(*p);
            residues.push(coords.iter().map(|t| t.residue().clone()).collect());
        }
        let den = x.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let num = x.iter().map(|q| (q * BigRational::from_integer(den.clone())).to_integer()).collect();
        let effective = vec![precision; primes.len()];
        Ok(SolenoidPoint { num, den, primes, residues, effective, precision }.normalized())
    }

    /// A point of the torus (`S` empty).
    pub fn torus(x: &[BigRational]) -> Self {
        Self::new(x, &[]).expect("no p-adic parts")
    }

    fn normalized(mut self) -> Self {
        let moduli: Vec<BigInt> = self.primes.iter().zip(&self.effective).map(|(&p, &e)| p_pow(p, e)).collect();
        for i in 0..self.num.len() {
            let (s, r) = self.num[i].div_mod_floor(&self.den);
            self.num[i] = r;
            for (res, m) in self.residues.iter_mut().zip(&moduli) {
                res[i] = (&res[i] - &s).mod_floor(m);
            }
        }
        for (res, m) in self.residues.iter_mut().zip(&moduli) {
            for r in res.iter_mut() {
                *r = r.mod_floor(m);
            }
        }
        let g = self.num.iter().fold(self.den.clone(), |g, x| g.gcd(x));
        if !g.is_one() {
            self.den /= &g;
            for x in self.num.iter_mut() {
                *x /= &g;
            }
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    pub fn x(&self) -> Vec<BigRational> {
        self.num.iter().map(|n| BigRational::new(n.clone(), self.den.clone())).collect()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Nominal precision `K` the point was created with.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn effective_precision(&self, p: u64) -> Option<u32> {
        self.prime_index(p).map(|i| self.effective[i])
    }

    /// `ξ_p` at its effective precision; `None` when `p ∉ S` or no digit
    /// is left.
    pub fn padic(&self, p: u64) -> Option<Vec<PadicTruncated>> {
        let i = self.prime_index(p)?;
        let e = self.effective[i];
        (e > 0).then(|| self.residues[i].iter().map(|r| PadicTruncated::new(p, e, r.clone())).collect())
    }

    fn prime_index(&self, p: u64) -> Option<usize> {
        self.primes.iter().position(|&q| q == p)
    }

    /// Same real part and the same p-adic digits wherever both points
    /// still know them.
    pub fn agrees_on_retained(&self, other: &Self) -> bool {
        if self.num != other.num || self.den != other.den || self.primes != other.primes {
            return false;
        }
        (0..self.primes.len()).all(|i| {
            let m = p_pow(self.primes[i], self.effective[i].min(other.effective[i]));
            self.residues[i].iter().zip(&other.residues[i]).all(|(a, b)| a.mod_floor(&m) == b.mod_floor(&m))
        })
    }

    /// Exact phase `⟨k, x⟩ − Σ_p {⟨k, ξ_p⟩}_p mod 1` of the character `χ_k`.
    pub fn character_phase(&self, k: &DualMode) -> Result<BigRational, SolenoidError> {
        let prepared = PreparedMode::new(k, &self.primes)?;
        let (num, den) = prepared.phase_parts(self)?;
        Ok(BigRational::new(num, den))
    }

    fn check_action(&self, action: &ActionSpec) -> Result<(), SolenoidError> {
        if action.dim() != self.dim() {
            return Err(SolenoidError::DimensionMismatch { expected: action.dim(), found: self.dim() });
        }
        if action.primes() != self.primes.as_slice() {
            return Err(SolenoidError::PrimeMismatch { point: self.primes.clone(), action: action.primes().to_vec() });
        }
        Ok(())
    }

    pub(crate) fn apply_matrix(&self, m: &IntMatrix) -> SolenoidPoint {
        let mut out = self.clone();
        out.num = m.mul_vec(&self.num);
        for (i, res) in out.residues.iter_mut().enumerate() {
            if self.effective[i] > 0 {
                *res = m.mul_vec(&self.residues[i]);
            }
        }
        out.normalized()
    }
}

/// Forward action `ρ(a)` for `a ∈ ℤ^k_+`: the integer matrix acts on the
/// real part and on every `ξ_p`; precision is unchanged.
pub fn solenoid_apply(point: &SolenoidPoint, action: &ActionSpec, a: &[u64]) -> Result<SolenoidPoint, SolenoidError> {
    point.check_action(action)?;
    if a.len() != action.rank() {
        return Err(SolenoidError::DimensionMismatch { expected: action.rank(), found: a.len() });
    }
    Ok(point.apply_matrix(&action.element_nonneg(a)))
}

/// Inverse action `ρ(a)^{-1}` for `a ∈ ℤ^k_+`.
///
/// With `l_p` the least integer such that `p^{l_p}·ρ(a)^{-1}` is p-integral,
/// an integer vector `n ≡ ξ_p (mod p^{l_p})` is chosen by the Chinese
/// remainder theorem and subtracted from both parts. `ρ(a)^{-1}` is then
/// applied over ℚ and on the now divisible p-adic parts. The effective
/// precision of `p` drops by `l_p`.
pub fn solenoid_apply_inverse(
    point: &SolenoidPoint,
    action: &ActionSpec,
    a: &[u64],
) -> Result<SolenoidPoint, SolenoidError> {
    point.check_action(action)?;
    if a.len() != action.rank() {
        return Err(SolenoidError::DimensionMismatch { expected: action.rank(), found: a.len() });
    }
    let neg: Vec<i64> = a.iter().map(|&x| -(x as i64)).collect();
    let inv = action.element(&neg);
    apply_inverse_matrix(point, &inv)
}

fn loss(inv: &QMatrix, p: u64) -> u32 {
    let mut l = 0i64;
    for i in 0..inv.n_rows() {
        for x in inv.row_vec(i) {
            if let Some(v) = vp_rational(&x, p) {
                l = l.max(-v);
            }
        }
    }
    l as u32
}

fn apply_inverse_matrix(point: &SolenoidPoint, inv: &QMatrix) -> Result<SolenoidPoint, SolenoidError> {
    let d = point.dim();
    let losses: Vec<u32> = point.primes.iter().map(|&p| loss(inv, p)).collect();
    for (i, &l) in losses.iter().enumerate() {
        if point.effective[i] < l {
            return Err(SolenoidError::PrecisionExhausted {
                prime: point.primes[i],
                needed: l,
                available: point.effective[i],
            });
        }
    }
    // n ≡ ξ_p (mod p^{l_p}) componentwise
    let mut n = vec![BigInt::zero(); d];
    let mut modulus = BigInt::one();
    for (i, &l) in losses.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let m = p_pow(point.primes[i], l);
        let inv_mod = mod_inverse(&modulus.mod_floor(&m), &m).expect("distinct primes");
        for (j, nj) in n.iter_mut().enumerate() {
            let t = ((&point.residues[i][j] - &*nj) * &inv_mod).mod_floor(&m);
            *nj += &modulus * t;
        }
        modulus *= m;
    }
    let x: Vec<BigRational> = point
        .num
        .iter()
        .zip(&n)
        .map(|(a, b)| BigRational::new(a.clone(), point.den.clone()) - BigRational::from_integer(b.clone()))
        .collect();
    let y = inv.mul_vec(&x);
    let den = y.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let num = y.iter().map(|q| (q * BigRational::from_integer(den.clone())).to_integer()).collect();

    let mut residues = Vec::with_capacity(point.primes.len());
    let mut effective = Vec::with_capacity(point.primes.len());
    for (i, &p) in point.primes.iter().enumerate() {
        let (e, l) = (point.effective[i], losses[i]);
        let e2 = e - l;
        effective.push(e2);
        if e2 == 0 {
            residues.push(vec![BigInt::zero(); d]);
            continue;
        }
        let full = p_pow(p, e);
        let pl = p_pow(p, l);
        let target = p_pow(p, e2);
        let v: Vec<BigInt> = point.residues[i]
            .iter()
            .zip(&n)
            .map(|(r, nj)| {
                let diff = (r - nj).mod_floor(&full);
                debug_assert!((&diff % &pl).is_zero());
                diff / &pl
            })
            .collect();
        let scaled = BigRational::from_integer(pl.clone());
        let row: Vec<Vec<BigInt>> = (0..d)
            .map(|r| {
                inv.row_vec(r)
                    .iter()
                    .map(|q| rational_mod_pk(&(q * &scaled), p, e2).expect("p^l·ρ(a)^{-1} is p-integral"))
                    .collect()
            })
            .collect();
        residues.push(
            row.iter()
                .map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum::<BigInt>().mod_floor(&target))
                .collect(),
        );
    }
    Ok(SolenoidPoint { num, den, primes: point.primes.clone(), residues, effective, precision: point.precision }
        .normalized())
}

/// A character prepared for repeated evaluation: `k = kn / kd` and, per
/// prime of `S` dividing `kd`, the digits it reads and the unit part of `kd`.
#[derive(Clone, Debug)]
pub(crate) struct PreparedMode {
    kn: Vec<BigInt>,
    kd: BigInt,
    padic: Vec<(usize, u32, BigInt, BigInt)>,
}

impl PreparedMode {
    pub(crate) fn new(k: &DualMode, primes: &[u64]) -> Result<Self, SolenoidError> {
        k.check_lattice(primes)?;
        let kd = k.vector.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let kn = k.vector.iter().map(|q| (q * BigRational::from_integer(kd.clone())).to_integer()).collect();
        let mut padic = Vec::new();
        for (i, &p) in primes.iter().enumerate() {
            let j = vp_int(&kd, p).unwrap_or(0);
            if j > 0 {
                let pj = p_pow(p, j);
                let unit = &kd / &pj;
                let u_inv = mod_inverse(&unit.mod_floor(&pj), &pj).expect("unit part");
                padic.push((i, j, pj, u_inv));
            }
        }
        Ok(PreparedMode { kn, kd, padic })
    }

    /// Phase as `num / den` with `0 ≤ num < den`.
    fn phase_parts(&self, z: &SolenoidPoint) -> Result<(BigInt, BigInt), SolenoidError> {
        let mut den = &self.kd * &z.den;
        let mut num: BigInt = self.kn.iter().zip(&z.num).map(|(a, b)| a * b).sum();
        for (i, j, pj, u_inv) in &self.padic {
            if z.effective[*i] < *j {
                return Err(SolenoidError::PrecisionExhausted {
                    prime: z.primes[*i],
                    needed: *j,
                    available: z.effective[*i],
                });
            }
            let s: BigInt = self.kn.iter().zip(&z.residues[*i]).map(|(a, b)| a * b).sum();
            let frac = (s * u_inv).mod_floor(pj);
            // num/den − frac/pj
            num = num * pj - frac * &den;
            den *= pj;
        }
        Ok((num.mod_floor(&den), den))
    }

    pub(crate) fn phase_f64(&self, z: &SolenoidPoint) -> Result<f64, SolenoidError> {
        let (num, den) = self.phase_parts(z)?;
        Ok(ratio_to_f64(&num, &den))
    }
}

/// `num / den` for `0 ≤ num < den`, accurate even when both overflow f64.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let bits = den.bits();
    if bits <= 1000 {
        return num.to_f64().unwrap_or(0.0) / den.to_f64().unwrap_or(1.0);
    }
    let shift = bits - 64;
    let n = (num >> shift).to_f64().unwrap_or(0.0);
    let d = (den >> shift).to_f64().unwrap_or(1.0);
    n / d
}

fn sample_mod_pk(rng: &mut ChaCha8Rng, p: u64, k: u32) -> BigInt {
    let mut per_word = 0u32;
    let mut pw = 1u64;
    while let Some(next) = pw.checked_mul(p).filter(|&v| v <= 1 << 62) {
        pw = next;
        per_word += 1;
    }
    let mut out = BigInt::zero();
    let mut scale = BigInt::one();
    let mut left = k;
    while left > 0 {
        let j = left.min(per_word);
        let m = p.pow(j);
        out += &scale * BigInt::from(rng.random_range(0..m));
        scale *= m;
        left -= j;
    }
    out
}

/// `count` Haar-distributed points: real parts uniform on the `2^-32` grid,
/// p-adic residues uniform mod `p^K`. Chunk `c` of 1024 points draws from a
/// ChaCha stream seeded with `seed ^ c`, so output does not depend on the
/// thread count.
pub fn haar_sample(seed: u64, d: usize, primes: &[u64], precision: u32, count: usize) -> Vec<SolenoidPoint> {
    let n_chunks = count.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len)
                .map(|_| {
                    let num: Vec<BigInt> = (0..d).map(|_| BigInt::from(rng.random::<u32>())).collect();
                    let residues: Vec<Vec<BigInt>> =
                        primes.iter().map(|&p| (0..d).map(|_| sample_mod_pk(&mut rng, p, precision)).collect()).collect();
                    SolenoidPoint {
                        num,
                        den: BigInt::one() << HAAR_GRID_BITS,
                        primes: primes.to_vec(),
                        residues,
                        effective: vec![precision; primes.len()],
                        precision,
                    }
                    .normalized()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solenoid::TrigFunction;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn doubling() -> ActionSpec {
        ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2]])], Some(vec![2])).unwrap()
    }

    fn cat() -> ActionSpec {
        ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])], None).unwrap()
    }

    fn pt(x: BigRational, xi: i64, k: u32) -> SolenoidPoint {
        SolenoidPoint::new(&[x], &[(2, vec![PadicTruncated::new(2, k, xi)])]).unwrap()
    }

    #[test]
    fn forward_examples() {
        let z = pt(q(1, 3), 5, 4);
        assert_eq!(solenoid_apply(&z, &doubling(), &[0]).unwrap(), z);
        let w = solenoid_apply(&z, &doubling(), &[1]).unwrap();
        assert_eq!(w.x(), vec![q(2, 3)]);
        assert_eq!(w.padic(2).unwrap()[0].residue(), &BigInt::from(10));
        let two = solenoid_apply(&w, &doubling(), &[2]).unwrap();
        assert_eq!(two, solenoid_apply(&z, &doubling(), &[3]).unwrap());
    }

    #[test]
    fn inverse_examples() {
        // the shift n = 1 is taken out of both parts, so ξ₂ returns to 1
        let z = pt(q(0, 1), 1, 3);
        let w = solenoid_apply_inverse(&z, &doubling(), &[1]).unwrap();
        assert_eq!(w.x(), vec![q(1, 2)]);
        assert_eq!(w.effective_precision(2), Some(2));
        assert_eq!(w.padic(2).unwrap()[0], PadicTruncated::new(2, 2, 1));
        let back = solenoid_apply(&w, &doubling(), &[1]).unwrap();
        assert!(back.agrees_on_retained(&z));

        assert_eq!(solenoid_apply_inverse(&z, &doubling(), &[0]).unwrap(), z);

        let z = pt(q(1, 5), 1, 1);
        let w = solenoid_apply_inverse(&z, &doubling(), &[1]).unwrap();
        assert_eq!(w.effective_precision(2), Some(0));
        assert_eq!(
            solenoid_apply_inverse(&w, &doubling(), &[1]),
            Err(SolenoidError::PrecisionExhausted { prime: 2, needed: 1, available: 0 })
        );
    }

    #[test]
    fn character_reads_padic_digits() {
        // χ_{1/2}(x, ξ) = e(x/2 − ξ/2)
        let z = pt(q(1, 3), 1, 3);
        let k = DualMode::new(vec![q(1, 2)], crate::solenoid::ExactComplex::new(q(1, 1), q(0, 1)));
        assert_eq!(z.character_phase(&k).unwrap(), q(2, 3));
        let deep = DualMode::new(vec![q(1, 16)], k.coeff.clone());
        assert_eq!(z.character_phase(&deep), Err(SolenoidError::PrecisionExhausted { prime: 2, needed: 4, available: 3 }));
        // invariance under the diagonal ℤ: (x + 1, ξ + 1) is the same point
        let shifted = pt(q(4, 3), 2, 3);
        assert_eq!(shifted, z);
    }

    #[test]
    fn haar_sampling() {
        let a = haar_sample(0, 2, &[2, 3], 6, 2500);
        assert_eq!(a, haar_sample(0, 2, &[2, 3], 6, 2500));
        assert_ne!(a, haar_sample(1, 2, &[2, 3], 6, 2500));
        let one = TrigFunction::constant(2, crate::solenoid::ExactComplex::new(q(1, 1), q(0, 1)));
        let m = &one.modes()[0];
        assert!(a.iter().all(|z| z.character_phase(m).unwrap().is_zero()));
        let big = haar_sample(0, 1, &[2], 12, 10_000);
        let chi = PreparedMode::new(&DualMode::new(vec![q(3, 4)], m.coeff.clone()), &[2]).unwrap();
        let (mut re, mut im) = (0.0, 0.0);
        for z in &big {
            let t = std::f64::consts::TAU * chi.phase_f64(z).unwrap();
            re += t.cos();
            im += t.sin();
        }
        assert!(re.hypot(im) / 1e4 <= 4.0 / 100.0);
    }

    fn random_point(seed: u64, action: &ActionSpec, k: u32) -> SolenoidPoint {
        haar_sample(seed, action.dim(), action.primes(), k, 1).remove(0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pushforward_matches_dual_action(seed in any::<u64>(), e in 0u64..5, k in proptest::collection::vec(-6i64..=6, 2), den in 0u32..3) {
            let action = ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2, 1], vec![0, 3]])], None).unwrap();
            let z = random_point(seed, &action, 8);
            let mode = DualMode::new(
                k.iter().map(|&x| BigRational::new(x.into(), BigInt::from(6u32.pow(den)))).collect(),
                crate::solenoid::ExactComplex::new(q(1, 1), q(0, 1)),
            );
            let w = solenoid_apply(&z, &action, &[e]).unwrap();
            let pushed = crate::solenoid::dual_action(&action.element_nonneg(&[e]), &mode, action.primes()).unwrap();
            prop_assert_eq!(w.character_phase(&mode).unwrap(), z.character_phase(&pushed).unwrap());
        }

        #[test]
        fn inverse_then_forward_is_identity(seed in any::<u64>(), steps in 1u64..4) {
            for action in [doubling(), cat(), ActionSpec::new(vec![IntMatrix::from_rows(&[vec![2, 1], vec![0, 3]])], None).unwrap()] {
                let z = random_point(seed, &action, 12);
                let w = solenoid_apply_inverse(&z, &action, &[steps]).unwrap();
                let back = solenoid_apply(&w, &action, &[steps]).unwrap();
                prop_assert!(back.agrees_on_retained(&z));
                for &p in action.primes() {
                    let l = loss(&action.element(&[-(steps as i64)]), p);
                    prop_assert_eq!(w.effective_precision(p), Some(12 - l));
                }
            }
        }

        #[test]
        fn haar_invariance(seed in any::<u64>(), k in proptest::collection::vec(-3i64..=3, 2), e in 0u64..4) {
            prop_assume!(k.iter().any(|&x| x != 0));
            let action = cat();
            let pts = haar_sample(seed, 2, &[], 1, 2000);
            let chi = PreparedMode::new(&DualMode::integer(&k), &[]).unwrap();
            let m = action.element_nonneg(&[e]);
            let mean = |f: &dyn Fn(&SolenoidPoint) -> f64| {
                let (mut re, mut im) = (0.0, 0.0);
                for z in &pts {
                    let t = std::f64::consts::TAU * f(z);
                    re += t.cos();
                    im += t.sin();
                }
                re.hypot(im) / pts.len() as f64
            };
            let bound = 4.0 / (pts.len() as f64).sqrt();
            prop_assert!(mean(&|z| chi.phase_f64(z).unwrap()) <= bound);
            prop_assert!(mean(&|z| chi.phase_f64(&z.apply_matrix(&m)).unwrap()) <= bound);
        }
    }
}
