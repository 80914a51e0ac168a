//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL` line.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use filtered_spectra::algebra::{
    compass_sf_relation, random_walk_recursion_check, rank_one_eliminate, real_roots, resultant, verify_curve,
    BivariatePolynomial, MPoly, UniPoly,
};
use filtered_spectra::colorsolve::{density_profile, ColorSolver, DEFAULT_EPS};
use filtered_spectra::combinat::{
    catalan, enumerate_wigner_partitions, moments_by_enumeration, moments_by_enumeration_exact, TreeIntegralMode,
};
use filtered_spectra::exact::{int, rat, Rational};
use filtered_spectra::kernel::IntervalPartition;
use filtered_spectra::matrixlab::{
    covariance_check, eigenvalues_symmetric, esd_statistics, simulate_colored, simulate_filtered, BinRule, Matrix,
    SampleConfig,
};
use filtered_spectra::moments::{hankel, theoretical_moments, theoretical_moments_exact};
use filtered_spectra::{kernel_from_filter, validate_kernel, Filter, Kernel};

/// Written straight to stdout so the line shows up without `--nocapture`.
fn report(n: &str, ok: bool, started: Instant, detail: &str) {
    use std::io::Write;
    let line = format!(
        "criterion {n}: {} ({:.1}s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

fn within(started: Instant, limit: Duration) -> bool {
    started.elapsed() < limit
}

fn ne_kernel() -> Kernel {
    kernel_from_filter(&Filter::compass()).unwrap()
}

/// `s = g_ab (1 + r_ab cos θ cos θ')` on `[0, 2/7) ∪ [2/7, 1]` with fixed positive entries.
fn two_interval_kernel() -> Kernel {
    let partition = IntervalPartition::new(vec![int(0), rat(2, 7), int(1)]).unwrap();
    let g = [[rat(3, 2), rat(1, 3)], [rat(1, 3), rat(4, 5)]];
    let r = [[rat(1, 2), rat(-3, 4)], [rat(-3, 4), rat(2, 9)]];
    let mut entries = vec![];
    for a in 0..2 {
        for b in 0..2 {
            let z = |v: Rational| num_complex::Complex::new(v, Rational::zero());
            entries.push((0, 0, a, b, z(g[a][b].clone())));
            let q = &g[a][b] * &r[a][b] / int(4);
            for (i, j) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                entries.push((i, j, a, b, z(q.clone())));
            }
        }
    }
    Kernel::from_entries(partition, 1, entries).unwrap()
}

#[test]
fn criterion_1_catalan_counts() {
    let t = Instant::now();
    let want = [1u64, 2, 5, 14, 42, 132, 429, 1430];
    let mut ok = true;
    for (l, w) in (1..=8).zip(want) {
        let n = enumerate_wigner_partitions(2 * l).len() as u64;
        ok &= n == w && catalan(l) == w;
        ok &= enumerate_wigner_partitions(2 * l - 1).is_empty();
    }
    ok &= within(t, Duration::from_secs(5));
    report("1", ok, t, "Wigner partitions of 2..16 points");
    assert!(ok);
}

#[test]
fn criterion_2_oracle_equivalence() {
    let t = Instant::now();
    let mut ok = true;
    for (name, k) in [("constant", Kernel::constant_one()), ("NE", ne_kernel())] {
        let rec = theoretical_moments_exact(&k, 12).unwrap();
        let enu = moments_by_enumeration_exact(&k, 12).unwrap();
        let same = rec == enu;
        println!("  {name}: exact equality {same}");
        ok &= same;
    }
    let k = two_interval_kernel();
    assert!(validate_kernel(&k).is_valid());
    let rec = theoretical_moments(&k, 12).unwrap();
    let enu = moments_by_enumeration(&k, 12, TreeIntegralMode::Quadrature).unwrap();
    let err = rec
        .iter()
        .zip(&enu)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    println!("  two-interval: max relative difference {err:.2e}");
    ok &= err < 1e-9;
    ok &= within(t, Duration::from_secs(60));
    report("2", ok, t, "recursion vs. partition enumeration, k <= 12");
    assert!(ok);
}

#[test]
fn criterion_3_semicircle() {
    let t = Instant::now();
    let k = Kernel::constant_one();
    let m = theoretical_moments_exact(&k, 10).unwrap();
    let want: Vec<Rational> = [0, 1, 0, 2, 0, 5, 0, 14, 0, 42].iter().map(|&v| int(v)).collect();
    let moments_ok = m == want;

    let s3 = ColorSolver::new(&k).solve_anywhere(C::new(3.0, 0.0)).unwrap().stieltjes;
    let s_err = (s3 - C::new((3.0 - 5f64.sqrt()) / 2.0, 0.0)).norm();

    let d0 = density_profile(&k, &[0.0], DEFAULT_EPS).unwrap().density[0];
    let d_err = (d0 - 1.0 / std::f64::consts::PI).abs();

    let xs: Vec<f64> = (0..=600).map(|i| -3.0 + 0.01 * i as f64).collect();
    let grid = density_profile(&k, &xs, (1e-3, 5e-4)).unwrap();
    let (lo, hi) = grid.support_estimate.unwrap();
    let supp_err = (lo + 2.0).abs().max((hi - 2.0).abs());

    println!("  |S(3) - (3-sqrt5)/2| = {s_err:.2e}; |f(0) - 1/pi| = {d_err:.2e}; support [{lo}, {hi}]");
    let ok = moments_ok && s_err < 1e-10 && d_err < 1e-3 && supp_err <= 1e-2;
    report("3", ok, t, "semicircle moments, transform, density, support");
    assert!(ok);
}

#[test]
fn criterion_4_compass_example() {
    let t = Instant::now();
    let k = ne_kernel();

    // (a)
    let quartic = BivariatePolynomial::from_ints(&[(2, 4, 4), (3, 3, -1), (2, 2, -1), (1, 1, 1), (0, 0, 1)]);
    let cert = rank_one_eliminate(&compass_sf_relation(), &k).unwrap();
    let a = cert.curve.same_up_to_constant(&quartic);

    // (b)
    let disc = cert.curve.discriminant_y().unwrap();
    let mut c = vec![0i64; 11];
    c[6] = 16 * 1024;
    c[8] = -16 * 107;
    c[10] = -16 * 8;
    let expected = UniPoly::from_ints(&c);
    let b = disc.monic() == expected.monic();

    // (c)
    let edge = 0.25 * (-107.0 + 51.0 * 17f64.sqrt()).sqrt();
    let roots = real_roots(&disc).unwrap();
    let outer = roots.iter().map(|r| r.approx).fold(0.0, |m: f64, x| m.max(x.abs()));
    let root_err = roots
        .iter()
        .filter(|r| r.approx.abs() > 1e-6)
        .map(|r| (r.approx.abs() - edge).abs())
        .fold(0.0, f64::max);
    let xs: Vec<f64> = (0..=700).map(|i| -3.5 + 0.01 * i as f64).collect();
    let grid = density_profile(&k, &xs, (1e-3, 5e-4)).unwrap();
    let (lo, hi) = grid.support_estimate.unwrap();
    let supp_err = (lo + edge).abs().max((hi - edge).abs());
    let cc = roots.len() == 3 && (outer - edge).abs() < 1e-10 && root_err < 1e-10 && supp_err <= 1e-2;

    // (d)
    let lambdas: Vec<C> = (0..20)
        .map(|j| C::from_polar(10.0, std::f64::consts::PI * (2 * j + 1) as f64 / 20.0))
        .collect();
    let residual = verify_curve(&quartic, &k, &lambdas).unwrap();
    let d = residual < 1e-8;

    // (e)
    let probe = [-0.04, -0.02, -0.01, 0.01, 0.02, 0.04];
    let spike = density_profile(&k, &probe, (1e-3, 5e-4)).unwrap();
    let scaled: Vec<f64> = probe.iter().zip(&spike.density).map(|(x, f)| f * x.abs().sqrt()).collect();
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let spread = scaled.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
    let e = spread < 0.2;

    println!("  (a) quartic {a}; (b) discriminant {b}");
    println!("  (c) edge {edge:.12}, real_roots outer {outer:.12}, grid support [{lo:.3}, {hi:.3}]");
    println!("  (d) verify residual {residual:.2e} at 20 points, |lambda| = 10");
    println!("  (e) density*sqrt|x| = {scaled:.4?}, max deviation from mean {spread:.3}");
    let ok = a && b && cc && d && e && within(t, Duration::from_secs(300));
    report("4", ok, t, "compass curve, discriminant, edges, verification, spike");
    assert!(ok);
}

#[test]
fn criterion_5_monte_carlo() {
    let t = Instant::now();
    let k = ne_kernel();
    let m = theoretical_moments(&k, 6).unwrap();
    assert!((m[1] - 1.0).abs() < 1e-12 && (m[3] - 3.0).abs() < 1e-12);
    let mut ok = true;

    let cfg = SampleConfig::new(1000, 20240601, 5);
    let esds = simulate_filtered(&Filter::compass(), &cfg, 6).unwrap();
    let stats = esd_statistics(&esds, 6, BinRule::FreedmanDiaconis).unwrap();
    for p in [2, 4, 6] {
        let e = &stats.moments[p - 1];
        let z = (e.mean - m[p - 1]) / e.stderr;
        println!("  filtered N=1000  m{p}: {:.5} +- {:.5} vs {:.5} (z = {z:+.2})", e.mean, e.stderr, m[p - 1]);
        ok &= z.abs() < 3.0;
    }

    let cfg = SampleConfig::new(40, 20240602, 5);
    let esds = simulate_colored(&k, &cfg, 6).unwrap();
    let stats = esd_statistics(&esds, 6, BinRule::FreedmanDiaconis).unwrap();
    for p in [2, 4, 6] {
        let e = &stats.moments[p - 1];
        let z = (e.mean - m[p - 1]) / e.stderr;
        println!("  colored N=40     m{p}: {:.5} +- {:.5} vs {:.5} (z = {z:+.2})", e.mean, e.stderr, m[p - 1]);
        ok &= z.abs() < 3.0;
    }
    ok &= within(t, Duration::from_secs(600));
    report("5", ok, t, "simulated moments within 3 standard errors");
    assert!(ok);
}

#[test]
fn criterion_6_covariance() {
    let t = Instant::now();
    let h = Filter::compass();
    let cfg = SampleConfig::new(48, 777, 100_000);
    let quads = [
        (10, 20, 10, 20),
        (10, 20, 12, 22),
        (10, 20, 12, 20),
        (10, 20, 10, 18),
        (10, 20, 8, 22),
        (10, 20, 11, 21),
        (10, 20, 30, 40),
        (5, 30, 7, 28),
        (20, 40, 22, 42),
        (15, 35, 13, 37),
    ];
    let mut ok = true;
    for q in quads {
        let c = covariance_check(&h, &cfg, q).unwrap();
        println!(
            "  {q:?}: empirical {:+.4} theory {:+.4} z {:+.2}",
            c.empirical, c.theoretical, c.z_score
        );
        ok &= c.z_score.abs() < 4.0;
    }
    ok &= within(t, Duration::from_secs(120));
    report("6", ok, t, "entry covariances at 10 general-position quads");
    assert!(ok);
}

fn complex_in(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(a, b)| C::new(a, b))
}

fn small_poly() -> impl Strategy<Value = MPoly> {
    proptest::collection::vec(((0u32..3, 0u32..3), -4i64..5), 1..5).prop_map(|terms| {
        MPoly::from_terms(2, terms.into_iter().map(|((a, b), c)| (vec![a, b], int(c))))
    })
}

/// A fresh runner per property: a runner stops once it has seen `cases` successes in total.
fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: 24,
        failure_persistence: None,
        ..Config::default()
    })
}

#[test]
fn criterion_7_property_suites() {
    let t = Instant::now();
    let mut failures = vec![];
    let kernels = [Kernel::constant_one(), ne_kernel(), two_interval_kernel()];
    let cases = AtomicUsize::new(0);
    let tick = || cases.fetch_add(1, Ordering::Relaxed);

    // residual and symmetries of S
    for k in &kernels {
        let solver = ColorSolver::new(k);
        let r = runner().run(&(-4.0..4.0f64, 0.05..4.0f64), |(x, y)| {
            tick();
            let up = solver.solve_anywhere(C::new(x, y)).expect("solve above");
            let down = solver.solve_anywhere(C::new(x, -y)).expect("solve below");
            prop_assert!(up.residual < 1e-12, "residual {}", up.residual);
            prop_assert!(down.residual < 1e-12, "residual {}", down.residual);
            prop_assert!(up.stieltjes.im <= 0.0);
            prop_assert!((up.stieltjes.conj() - down.stieltjes).norm() < 1e-9);
            Ok(())
        });
        if let Err(e) = r {
            failures.push(format!("stieltjes: {e}"));
        }
    }

    // Hankel PSD
    for k in &kernels {
        let m = theoretical_moments(k, 12).unwrap();
        let h = hankel(&m, 7);
        let n = h.len();
        let mat = Matrix::from_fn(n, |i, j| h[i][j]);
        let ev = eigenvalues_symmetric(&mat).unwrap();
        let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-8 {
            failures.push(format!("hankel min eigenvalue {min}"));
        }
    }

    // resultant multiplicativity: res(fg, h) = res(f, h) res(g, h)
    let r = runner().run(&(small_poly(), small_poly(), small_poly()), |(f, g, h)| {
        prop_assume!(f.degree_in(1) > 0 && g.degree_in(1) > 0 && h.degree_in(1) > 0);
        tick();
        let fg = &f * &g;
        let res = |a: &MPoly| resultant(a, &h, 1).map_err(|e| TestCaseError::fail(e.to_string()));
        prop_assert_eq!(res(&fg)?, &res(&f)? * &res(&g)?);
        Ok(())
    });
    if let Err(e) = r {
        failures.push(format!("resultant: {e}"));
    }

    // random-walk recursions
    for ell in 1..=2usize {
        let r = runner().run(&proptest::collection::vec(complex_in(0.3), 2 * ell + 1), |z| {
            tick();
            let total: f64 = z.iter().map(|c| c.norm()).sum();
            let z: Vec<C> = if total > 0.3 { z.iter().map(|c| c * (0.3 / total)).collect() } else { z };
            let rep = random_walk_recursion_check(&z, ell, 80).expect("walk");
            prop_assert!(rep.max_residual < 1e-10, "residual {}", rep.max_residual);
            Ok(())
        });
        if let Err(e) = r {
            failures.push(format!("random walk ell={ell}: {e}"));
        }
    }

    for f in &failures {
        println!("  {f}");
    }
    println!("  {} generated cases checked", cases.load(Ordering::Relaxed));
    let ok = failures.is_empty();
    report("7", ok, t, "solver, Hankel, resultant and random-walk properties");
    assert!(ok);
}

#[test]
fn criterion_8_negative_controls() {
    let t = Instant::now();
    let corrupted = Kernel::from_entries(
        IntervalPartition::unit(),
        2,
        [
            (0, 0, 0, 0, num_complex::Complex::new(int(1), int(0))),
            (2, 0, 0, 0, num_complex::Complex::new(int(1), int(0))),
            (-2, 0, 0, 0, num_complex::Complex::new(int(1), int(0))),
        ],
    )
    .unwrap();
    let rejected = !validate_kernel(&corrupted).is_valid();
    let wrong = BivariatePolynomial::from_ints(&[(0, 2, 1), (1, 1, -1), (0, 0, 2)]);
    let residual = verify_curve(&wrong, &Kernel::constant_one(), &[C::new(3.0, 0.0)]).unwrap();
    println!("  corrupted kernel rejected: {rejected}; wrong-curve residual {residual:.3}");
    let ok = rejected && residual >= 0.5;
    report("8", ok, t, "corrupted kernel and wrong curve are caught");
    assert!(ok);
}
