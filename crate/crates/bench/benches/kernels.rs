use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hyperrank::conjugacy::{solve_conjugacy, SolverConfig};
use hyperrank::ergodicity::{ergodic_z2_subgroup, is_ergodic};
use hyperrank::nilpotent::{nil_crt, NilStructure};
use hyperrank::solenoid::{clt_check, exact_curve, TrigFunction};
use hyperrank::spectra::{joint_spectrum, ActionSpec, DEFAULT_TOL};
use hyperrank::{charpoly, newton_polygon, IntMatrix};
use hyperrank_bench::{cat, cubic_units, doubling, doubling_sine, heisenberg_targets};

fn algebra(c: &mut Criterion) {
    let m = IntMatrix::from_rows(&(0..8).map(|i| (0..8).map(|j| ((3 * i + 5 * j) % 7) as i64 - 3).collect()).collect::<Vec<_>>());
    c.bench_function("charpoly_8x8", |b| b.iter(|| charpoly(black_box(&m))));
    let f = charpoly(&m);
    c.bench_function("newton_polygon_p3", |b| b.iter(|| newton_polygon(black_box(&f), 3)));
}

fn ergodicity(c: &mut Criterion) {
    c.bench_function("is_ergodic_cat", |b| b.iter(|| is_ergodic(black_box(&cat()))));
    let action = cubic_units();
    c.bench_function("ergodic_z2_cubic_bound4", |b| b.iter(|| ergodic_z2_subgroup(black_box(&action), 4)));
}

fn spectra(c: &mut Criterion) {
    let action = ActionSpec::new(vec![IntMatrix::from_rows(&[vec![6, 2], vec![3, 4]])], None).unwrap();
    c.bench_function("joint_spectrum_padic", |b| b.iter(|| joint_spectrum(black_box(&action), DEFAULT_TOL)));
}

fn solenoid(c: &mut Criterion) {
    let f = TrigFunction::character(&[1, -2]);
    let g = f.conjugate();
    c.bench_function("exact_curve_cat_12", |b| b.iter(|| exact_curve(&f, &g, black_box(&cat()), &[], 12)));
    let cosine = TrigFunction::cosine(&[1], num_rational::BigRational::from_integer(1.into()));
    c.bench_function("clt_doubling_n256", |b| b.iter(|| clt_check(&cosine, &doubling(), 256, 100, 1)));
}

fn nilpotent(c: &mut Criterion) {
    let h = NilStructure::heisenberg();
    let targets = heisenberg_targets(4);
    c.bench_function("nil_crt_heisenberg_l4", |b| b.iter(|| nil_crt(&h, black_box(&targets))));
}

fn conjugacy(c: &mut Criterion) {
    let map = doubling_sine(0.1);
    let mut group = c.benchmark_group("solve_conjugacy");
    group.sample_size(10);
    for log_n in [8u32, 10, 12] {
        let config = SolverConfig { resolution: 1 << log_n, ..SolverConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(1usize << log_n), &config, |b, cfg| {
            b.iter(|| solve_conjugacy(&map, cfg))
        });
    }
    group.finish();
}

criterion_group!(benches, algebra, ergodicity, spectra, solenoid, nilpotent, conjugacy);
criterion_main!(benches);
