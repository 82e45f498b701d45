use num_bigint::BigInt;
use num_traits::Zero;

use super::SpectraError;
use crate::algebra::modp::{is_prime, prime_divisors};
use crate::algebra::{IntMatrix, QMatrix};

/// A ℤ^k action by commuting nonsingular integer matrices together with a
/// finite prime set `S` covering every generator determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSpec {
    generators: Vec<IntMatrix>,
    primes: Vec<u64>,
}

impl ActionSpec {
    /// Validates the generators. When `primes` is `None`, `S` is the set of
    /// primes dividing some determinant.
    pub fn new(generators: Vec<IntMatrix>, primes: Option<Vec<u64>>) -> Result<Self, SpectraError> {
        let first = generators.first().ok_or(SpectraError::EmptyAction)?;
        let d = first.dim();
        let mut needed = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            if g.dim() != d {
                return Err(SpectraError::DimensionMismatch(i, g.dim(), d));
            }
            let det = g.det();
            if det.is_zero() {
                return Err(SpectraError::SingularGenerator(i));
            }
            needed.extend(prime_divisors(&det));
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes_with(&generators[j]) {
                    return Err(SpectraError::CommutativityViolated(i, j));
                }
            }
        }
        needed.sort_unstable();
        needed.dedup();
        let primes = match primes {
            None => needed,
            Some(mut s) => {
                if let Some(&p) = s.iter().find(|&&p| !is_prime(p)) {
                    return Err(SpectraError::NotPrime(p));
                }
                s.sort_unstable();
                s.dedup();
                if let Some(&p) = needed.iter().find(|p| !s.contains(p)) {
                    return Err(SpectraError::MissingPrime(p));
                }
                s
            }
        };
        Ok(ActionSpec { generators, primes })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `n = ∏_{p∈S} p`.
    pub fn s_product(&self) -> BigInt {
        self.primes.iter().map(|&p| BigInt::from(p)).product()
    }

    /// `ρ(a) = ∏ A_i^{a_i}` over ℚ (negative exponents allowed).
    pub fn element(&self, a: &[i64]) -> QMatrix {
        assert_eq!(a.len(), self.rank(), "exponent vector has the wrong length");
        let d = self.dim();
        let mut acc = QMatrix::identity(d);
        for (g, &e) in self.generators.iter().zip(a) {
            if e == 0 {
                continue;
            }
            let base = if e > 0 {
                g.to_rational()
            } else {
                g.to_rational().inverse().expect("generators are nonsingular")
            };
            acc = acc.mul(&base.pow(e.unsigned_abs()));
        }
        acc
    }

    /// `ρ(a)` for `a ≥ 0` componentwise, as an integer matrix.
    pub fn element_nonneg(&self, a: &[u64]) -> IntMatrix {
        assert_eq!(a.len(), self.rank(), "exponent vector has the wrong length");
        let mut acc = IntMatrix::identity(self.dim());
        for (g, &e) in self.generators.iter().zip(a) {
            if e > 0 {
                acc = acc.mul(&g.pow(e));
            }
        }
        acc
    }
}
