//! Inputs shared by the benchmarks in `benches/`.

use hyperrank::conjugacy::{Perturbation, PerturbedMap, TrigTerm};
use hyperrank::nilpotent::{CrtTarget, NilElement};
use hyperrank::spectra::ActionSpec;
use hyperrank::IntMatrix;

pub fn cat() -> IntMatrix {
    IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])
}

pub fn doubling() -> IntMatrix {
    IntMatrix::from_rows(&[vec![2]])
}

/// ℤ² action by two units of the cubic field of `x³ − x² − 2x + 1`.
pub fn cubic_units() -> ActionSpec {
    let c = IntMatrix::from_rows(&[vec![0, 0, -1], vec![1, 0, 2], vec![0, 1, 1]]);
    let b = IntMatrix::identity(3).add(&c);
    ActionSpec::new(vec![c, b], None).expect("commuting units")
}

/// `x ↦ 2x + amplitude·sin 2πx`.
pub fn doubling_sine(amplitude: f64) -> PerturbedMap {
    let q = Perturbation::Trig(vec![TrigTerm { k: vec![1], cos: vec![0.0], sin: vec![amplitude] }]);
    PerturbedMap::new(doubling(), q).expect("expanding")
}

/// Heisenberg targets over `{2, 3}` at level `l`.
pub fn heisenberg_targets(l: u32) -> Vec<CrtTarget> {
    [(2u64, [1i64, 3, 5]), (3, [2, 7, 4])]
        .into_iter()
        .map(|(p, xi)| CrtTarget { xi: NilElement::padic(p, l, xi.iter().map(|&x| x.into()).collect()), level: l })
        .collect()
}
