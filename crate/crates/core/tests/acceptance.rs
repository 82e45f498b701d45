//! Acceptance suite. Runs every criterion at its stated tolerance and time
//! limit and prints one line per criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hyperrank::conjugacy::{solve_conjugacy, Perturbation, PerturbedMap, SolverConfig, TrigTerm};
use hyperrank::ergodicity::{ergodic_z2_subgroup, has_rank_one_factor, is_ergodic, ErgodicityError};
use hyperrank::nilpotent::{nil_crt, CrtTarget, NilElement, NilStructure};
use hyperrank::solenoid::{
    clt_check, exact_curve, fit_curve, haar_sample, mode_escape_time, monte_carlo_curve, solenoid_apply,
    solenoid_apply_inverse, DualMode, McConfig, MixingFit, SolenoidError, TrigFunction,
};
use hyperrank::spectra::{joint_spectrum, ActionSpec, Place, DEFAULT_TOL};
use hyperrank::{newton_polygon, IntMatrix, RationalPoly};
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn m(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows(rows)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Some nonzero `z` with `‖z‖∞ ≤ 50` and `(Aᵀ)^m z = z` for some `m ≤ 12`,
/// in plain machine integers.
fn dual_orbit_periodic(a: [[i64; 2]; 2]) -> bool {
    let t = [[a[0][0], a[1][0]], [a[0][1], a[1][1]]];
    let mut p = [[1i128, 0], [0, 1]];
    for _ in 1..=12 {
        p = [
            [
                p[0][0] * t[0][0] as i128 + p[0][1] * t[1][0] as i128,
                p[0][0] * t[0][1] as i128 + p[0][1] * t[1][1] as i128,
            ],
            [
                p[1][0] * t[0][0] as i128 + p[1][1] * t[1][0] as i128,
                p[1][0] * t[0][1] as i128 + p[1][1] * t[1][1] as i128,
            ],
        ];
        for x in -50i128..=50 {
            for y in -50i128..=50 {
                if (x, y) != (0, 0) && p[0][0] * x + p[0][1] * y == x && p[1][0] * x + p[1][1] * y == y {
                    return true;
                }
            }
        }
    }
    false
}

fn criterion_1() -> Outcome {
    let mut total = 0;
    let mut non_ergodic = 0;
    let mut contradictions = Vec::new();
    for e in 0..7i64.pow(4) {
        let v: Vec<i64> = (0..4).map(|i| (e / 7i64.pow(i)) % 7 - 3).collect();
        if v[0] * v[3] - v[1] * v[2] == 0 {
            continue;
        }
        total += 1;
        let a = m(&[vec![v[0], v[1]], vec![v[2], v[3]]]);
        let cert = is_ergodic(&a);
        let valid = cert.verify(&a.to_rational()).map_err(|e| e.to_string())?;
        let periodic = dual_orbit_periodic([[v[0], v[1]], [v[2], v[3]]]);
        if !cert.is_ergodic() {
            non_ergodic += 1;
        }
        if !valid || cert.is_ergodic() == periodic {
            contradictions.push(v);
        }
    }
    ensure(contradictions.is_empty(), || format!("{} contradictions, first {:?}", contradictions.len(), contradictions[0]))?;
    Ok(format!("{total} matrices, {non_ergodic} non-ergodic, no contradictions"))
}

fn valuation(n: &BigInt, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(&p) {
        n /= &p;
        v += 1;
    }
    v
}

/// Checks the product formula for `ρ(a)`, where `ρ(a) = A^{e(a)}` and `det A = det`.
fn product_formula(action: &ActionSpec, det: &BigInt, exponent: impl Fn(&[i64]) -> i64, rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let s = joint_spectrum(action, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let d = action.dim() as f64;
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let a: Vec<i64> = (0..action.rank()).map(|_| rng.random_range(-3..=3)).collect();
        let e = exponent(&a);
        let mut total = s.weighted_sum(Place::Real, &a);
        for &p in action.primes() {
            let exact = s.weighted_slope_sum(p, &a);
            ensure(exact == Ratio::from_integer(e * valuation(det, p)), || {
                format!("p = {p}, a = {a:?}: valuation sum {exact}, expected {}", e * valuation(det, p))
            })?;
            total += s.weighted_sum(Place::Prime(p), &a);
        }
        ensure(total.abs() <= 1e-9 * d, || format!("a = {a:?}: Σχ(a) = {total:e}"))?;
        worst = worst.max(total.abs());
    }
    Ok(worst)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 50 {
        let d = rng.random_range(2..=3usize);
        let rows: Vec<Vec<i64>> = (0..d).map(|_| (0..d).map(|_| rng.random_range(-4..=4)).collect()).collect();
        let a = m(&rows);
        let det = a.det();
        if det.is_zero() {
            continue;
        }
        let k = rng.random_range(1..=3u64);
        let action = ActionSpec::new(vec![a.clone(), a.pow(k)], None).map_err(|e| e.to_string())?;
        worst = worst.max(product_formula(&action, &det, |x| x[0] + k as i64 * x[1], &mut rng)?);
        pairs += 1;
    }
    for n in 2..=11 {
        let cat = m(&[vec![n, 1], vec![n - 1, 1]]);
        let action = ActionSpec::new(vec![cat], None).map_err(|e| e.to_string())?;
        worst = worst.max(product_formula(&action, &BigInt::one(), |x| x[0], &mut rng)?);
    }
    Ok(format!("50 pairs and 10 cat maps, max |Σχ(a)| = {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let primes = [2u64, 3, 5, 7];
    for trial in 0..200 {
        let p = primes[rng.random_range(0..primes.len())];
        let pi = BigInt::from(p);
        let mut f = RationalPoly::one();
        let mut expected: BTreeMap<Ratio<i64>, usize> = BTreeMap::new();
        // x^z splits off as zero roots
        let z = rng.random_range(0..=1usize);
        f = &f * &RationalPoly::monomial(z, BigRational::one());
        for _ in 0..rng.random_range(1..=4) {
            // x^a − p^b·u has a roots of valuation b/a when p ∤ u
            let a = rng.random_range(1..=3usize);
            let b = rng.random_range(0..=4u32);
            let mut u: i64 = rng.random_range(1..=30);
            while u % p as i64 == 0 {
                u += 1;
            }
            if rng.random_bool(0.5) {
                u = -u;
            }
            let c = pi.pow(b) * BigInt::from(u);
            let mut coeffs = vec![BigInt::zero(); a + 1];
            coeffs[0] = -c;
            coeffs[a] = BigInt::one();
            f = &f * &RationalPoly::from_bigints(&coeffs);
            *expected.entry(Ratio::new(b as i64, a as i64)).or_default() += a;
        }
        let np = newton_polygon(&f, p).map_err(|e| e.to_string())?;
        let mut found: BTreeMap<Ratio<i64>, usize> = BTreeMap::new();
        for (s, mult) in &np.slopes {
            *found.entry(*s).or_default() += mult;
        }
        ensure(found == expected && np.zero_roots == z, || {
            format!("trial {trial}, p = {p}, f = {f}: slopes {found:?}, expected {expected:?}")
        })?;
    }
    Ok("200 polynomials, slope multisets exact".into())
}

fn criterion_4() -> Outcome {
    let cat = m(&[vec![2, 1], vec![1, 1]]);
    let action = ActionSpec::new(vec![cat.clone()], None).map_err(|e| e.to_string())?;
    let ks: Vec<[i64; 2]> =
        (-3..=3).flat_map(|x| (-3..=3).map(move |y| [x, y])).filter(|k| *k != [0, 0]).collect();
    let mut worst_n0 = 0;
    let mut worst_z = 0.0f64;
    let mut mc_runs = 0;
    for (i, k) in ks.iter().enumerate() {
        let f = TrigFunction::character(k);
        for l in &ks {
            let g = TrigFunction::character(l);
            let exact = exact_curve(&f, &g, &cat, &[], 12).map_err(|e| e.to_string())?;
            let n0 = mode_escape_time(&f, &g, &cat, &[], 12)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("k = {k:?}, l = {l:?}: no escape by n = 12"))?;
            ensure(n0 <= 8, || format!("k = {k:?}, l = {l:?}: N0 = {n0}"))?;
            ensure(exact.iter().filter(|e| e.n >= n0).all(|e| e.value.re.is_zero() && e.value.im.is_zero()), || {
                format!("k = {k:?}, l = {l:?}: nonzero correlation after N0 = {n0}")
            })?;
            worst_n0 = worst_n0.max(n0);
            if exact.iter().all(|e| e.value.re.is_zero() && e.value.im.is_zero()) {
                continue;
            }
            let cfg = McConfig { samples: 10_000, seed: 4000 + i as u64, precision: 1 };
            let mc = monte_carlo_curve(&f, &g, &action, &[1], 12, &cfg).map_err(|e| e.to_string())?;
            mc_runs += 1;
            for ((n, est), e) in mc.iter().zip(&exact) {
                let x = Complex::new(e.value.re.to_f64().unwrap(), e.value.im.to_f64().unwrap());
                let gap = (est.value - x).norm();
                ensure(gap <= 4.0 * est.stderr + 1e-12, || {
                    format!("k = {k:?}, l = {l:?}, n = {n}: |MC − exact| = {gap:.3e}, stderr {:.3e}", est.stderr)
                })?;
                if est.stderr > 0.0 {
                    worst_z = worst_z.max(gap / est.stderr);
                }
            }
        }
    }
    Ok(format!(
        "{} character pairs, max N0 = {worst_n0}; {mc_runs} Monte Carlo curves, max z = {worst_z:.2}",
        ks.len() * ks.len()
    ))
}

fn criterion_5() -> Outcome {
    let modes = (0..=8)
        .map(|j| DualMode::new(vec![q(1 << j, 1)], Complex::new(q(1, 1 << j), BigRational::zero())))
        .collect();
    let f = TrigFunction::new(1, modes).map_err(|e| e.to_string())?;
    let curve = exact_curve(&f, &f.conjugate(), &m(&[vec![2]]), &[2], 12).map_err(|e| e.to_string())?;
    match fit_curve(&curve).map_err(|e| e.to_string())? {
        MixingFit::Rate { eta, .. } => {
            let ln2 = 2f64.ln();
            ensure((eta - ln2).abs() <= 0.05, || format!("eta = {eta:.4}, log 2 = {ln2:.4}"))?;
            Ok(format!("eta = {eta:.4} (log 2 = {ln2:.4})"))
        }
        other => Err(format!("expected a rate fit, got {other:?}")),
    }
}

/// Units `a + bC + cC²` of the order generated by `C`, coefficients in
/// `[−2, 2]`, excluding `±I`.
fn bounded_unit_search(c: &IntMatrix) -> Vec<IntMatrix> {
    let c2 = c.mul(c);
    let mut units = Vec::new();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            for cc in -2i64..=2 {
                if b == 0 && cc == 0 {
                    continue;
                }
                let u = IntMatrix::identity(3)
                    .scale(&a.into())
                    .add(&c.scale(&b.into()))
                    .add(&c2.scale(&cc.into()));
                if u.det().abs().is_one() {
                    units.push(u);
                }
            }
        }
    }
    units
}

fn fixture_generators() -> Result<Vec<IntMatrix>, String> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../cli/fixtures/cubic_units.json");
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let gens: Vec<Vec<Vec<i64>>> = serde_json::from_value(json["generators"].clone()).map_err(|e| e.to_string())?;
    Ok(gens.iter().map(|g| m(g)).collect())
}

fn criterion_6() -> Outcome {
    let gens = fixture_generators()?;
    let c = &gens[0];
    let units = bounded_unit_search(c);
    for g in &gens {
        ensure(units.contains(g), || "recorded generator is not found by the unit search".into())?;
    }
    let action = ActionSpec::new(gens.clone(), None).map_err(|e| e.to_string())?;
    let z2 = ergodic_z2_subgroup(&action, 20).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for s in -20i64..=20 {
        for t in -20i64..=20 {
            if s.gcd(&t) != 1 {
                continue;
            }
            let v: Vec<i64> = z2.a.iter().zip(&z2.b).map(|(x, y)| s * x + t * y).collect();
            let u = action.element(&v).to_int_matrix().ok_or("unit inverse is not integral")?;
            // every root of unity of degree ≤ 3 has order dividing 12
            let fixed = u.pow(12).sub(&IntMatrix::identity(3)).det();
            ensure(!fixed.is_zero(), || format!("ρ({v:?}) has a root of unity eigenvalue"))?;
            checked += 1;
        }
    }
    // the search certifies one element of each pair ±v
    ensure(checked == 2 * z2.certified, || format!("{checked} primitive elements but {} certified up to sign", z2.certified))?;

    let i2 = IntMatrix::identity(2);
    let product = ActionSpec::new(
        vec![m(&[vec![2, 1], vec![1, 1]]).direct_sum(&i2), i2.direct_sum(&m(&[vec![3, 1], vec![2, 1]]))],
        None,
    )
    .map_err(|e| e.to_string())?;
    let verdict = has_rank_one_factor(&product).map_err(|e| e.to_string())?;
    ensure(verdict.offending_block.is_some(), || "product action has no certified rank-one factor".into())?;
    ensure(matches!(ergodic_z2_subgroup(&product, 20), Err(ErgodicityError::RankOneFactor { .. })), || {
        "product action did not report the rank-one obstruction".into()
    })?;
    Ok(format!(
        "{} units found, Σ = ⟨{:?}, {:?}⟩ with {checked} primitive elements ergodic; product obstructed",
        units.len(),
        z2.a,
        z2.b
    ))
}

/// `n⁻¹ξ` in the Heisenberg group with `[e₀, e₁] = 2e₂`, first-kind coordinates.
fn heisenberg_left_quotient(n: &[BigInt], xi: &[BigInt]) -> [BigInt; 3] {
    [&xi[0] - &n[0], &xi[1] - &n[1], &xi[2] - &n[2] - &n[0] * &xi[1] + &n[1] * &xi[0]]
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = NilStructure::heisenberg();
    for trial in 0..100 {
        let mut targets = Vec::new();
        let mut raw = Vec::new();
        for p in [2u64, 3] {
            let l = rng.random_range(1..=4u32);
            let modulus = p.pow(l) as i64;
            let xi: Vec<BigInt> = (0..3).map(|_| BigInt::from(rng.random_range(0..modulus))).collect();
            targets.push(CrtTarget { xi: NilElement::padic(p, l, xi.clone()), level: l });
            raw.push((p, l, xi));
        }
        let sol = nil_crt(&h, &targets).map_err(|e| format!("trial {trial}: {e}"))?;
        let n: Vec<BigInt> = sol
            .n
            .coords()
            .iter()
            .map(|x| if x.is_integer() { Ok(x.to_integer()) } else { Err(format!("trial {trial}: n is not integral")) })
            .collect::<Result<_, _>>()?;
        for (p, l, xi) in &raw {
            let pl = BigInt::from(p.pow(*l));
            let r = heisenberg_left_quotient(&n, xi);
            ensure(r.iter().all(|x| x.is_multiple_of(&pl)), || format!("trial {trial}: n⁻¹ξ ≢ 0 mod {p}^{l}"))?;
        }
        ensure(sol.checks.iter().all(|c| c.holds), || format!("trial {trial}: internal check failed"))?;
    }
    Ok("100 random target pairs over {2, 3}, all congruences hold".into())
}

fn criterion_8() -> Outcome {
    let k = 12;
    let cases = [("doubling", m(&[vec![2]])), ("cat map", m(&[vec![2, 1], vec![1, 1]]))];
    let mut detail = Vec::new();
    for (name, a) in cases {
        let action = ActionSpec::new(vec![a], None).map_err(|e| e.to_string())?;
        let points = haar_sample(8, action.dim(), action.primes(), k, 100);
        let mut exhausted_at = None;
        for (i, z) in points.iter().enumerate() {
            let mut w = z.clone();
            for step in 1..=k as u64 + 2 {
                match solenoid_apply_inverse(&w, &action, &[1]) {
                    Ok(next) => {
                        w = next;
                        let back = solenoid_apply(&w, &action, &[step]).map_err(|e| e.to_string())?;
                        ensure(back.agrees_on_retained(z), || format!("{name}, point {i}, step {step}: round trip differs"))?;
                        for &p in action.primes() {
                            let expect = k - step as u32;
                            ensure(w.effective_precision(p) == Some(expect), || {
                                format!("{name}, point {i}, step {step}: precision {:?}, expected {expect}", w.effective_precision(p))
                            })?;
                        }
                        if step == 10 {
                            let direct = solenoid_apply_inverse(z, &action, &[10]).map_err(|e| e.to_string())?;
                            ensure(direct.agrees_on_retained(&w) && w.agrees_on_retained(&direct), || {
                                format!("{name}, point {i}: ten single steps differ from one step of ten")
                            })?;
                        }
                    }
                    Err(SolenoidError::PrecisionExhausted { needed, available, .. }) => {
                        // the budget is exhausted exactly when no digit is left
                        ensure(step == k as u64 + 1 && needed == 1 && available == 0, || {
                            format!("{name}, point {i}: exhausted at step {step} ({needed} needed, {available} left)")
                        })?;
                        exhausted_at = Some(step);
                        break;
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
        detail.push(match exhausted_at {
            Some(s) => format!("{name}: identity through 10 inverses, budget exhausted at step {s}"),
            None => format!("{name}: identity through {} inverses, no loss", k + 2),
        });
    }
    Ok(detail.join("; "))
}

fn criterion_9() -> Outcome {
    let doubling = m(&[vec![2]]);
    let sine = Perturbation::Trig(vec![TrigTerm { k: vec![1], cos: vec![0.0], sin: vec![0.1] }]);
    let map = PerturbedMap::new(doubling.clone(), sine).map_err(|e| e.to_string())?;
    let cfg = SolverConfig { resolution: 1 << 12, tol: 1e-8, budget: 200 };
    let field = solve_conjugacy(&map, &cfg).map_err(|e| e.to_string())?;
    ensure(field.final_residual() < 1e-8, || format!("residual {:e}", field.final_residual()))?;
    ensure(field.sweeps() <= 40, || format!("{} sweeps", field.sweeps()))?;
    let worst = field.contraction_factors().into_iter().fold(0.0f64, f64::max);
    ensure(worst <= 0.55, || format!("contraction factor {worst:.4}"))?;
    ensure(field.is_increasing(), || "φ is not strictly increasing".into())?;

    let delta = 0.3;
    let shift = PerturbedMap::new(doubling, Perturbation::constant(&[delta])).map_err(|e| e.to_string())?;
    let cfg = SolverConfig { resolution: 1 << 10, tol: f64::MIN_POSITIVE, budget: 200 };
    let flat = solve_conjugacy(&shift, &cfg).map_err(|e| e.to_string())?;
    // h ≡ δ solves h = (δ + h)/2
    let err = flat.values().iter().map(|h| (h - delta).abs()).fold(0.0f64, f64::max);
    ensure(err <= 4.0 * f64::EPSILON, || format!("constant shift off by {err:e}"))?;
    Ok(format!(
        "{} sweeps, residual {:.2e}, max factor {worst:.4}, increasing; constant shift within {err:.1e}",
        field.sweeps(),
        field.final_residual()
    ))
}

fn criterion_10() -> Outcome {
    let doubling = m(&[vec![2]]);
    let cos = TrigFunction::cosine(&[1], q(1, 1));
    let r = clt_check(&cos, &doubling, 4096, 1000, 10).map_err(|e| e.to_string())?;
    ensure(r.reference_variance == q(1, 2), || format!("reference σ² = {}", r.reference_variance))?;
    let rel = (r.empirical_variance - 0.5).abs() / 0.5;
    ensure(rel <= 0.1, || format!("empirical variance {:.4}", r.empirical_variance))?;
    let modes = cos.modes().iter().chain(TrigFunction::cosine(&[2], q(-1, 1)).modes()).cloned().collect();
    let cob = TrigFunction::new(1, modes).map_err(|e| e.to_string())?;
    let c = clt_check(&cob, &doubling, 4096, 1000, 10).map_err(|e| e.to_string())?;
    ensure(c.empirical_variance < 0.02, || format!("coboundary variance {:.4}", c.empirical_variance))?;
    Ok(format!("variance {:.4} (σ² = 1/2), coboundary {:.2e}", r.empirical_variance, c.empirical_variance))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("ergodicity oracle equivalence", 30, criterion_1),
        ("product formula", 10, criterion_2),
        ("Newton polygons", 5, criterion_3),
        ("exact mixing of characters", 60, criterion_4),
        ("lacunary mixing rate", 5, criterion_5),
        ("ergodic Z^2 subgroups", 60, criterion_6),
        ("nilpotent CRT", 5, criterion_7),
        ("solenoid inverse", 5, criterion_8),
        ("conjugacy solver", 10, criterion_9),
        ("CLT variance", 60, criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*limit);
        let (verdict, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over the {limit} s limit; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {verdict} [{name}] {:.2} s (limit {limit} s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
