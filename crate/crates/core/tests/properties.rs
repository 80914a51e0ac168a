//! Property tests over random filters, kernels, spectral points and polynomials.

use num_complex::Complex64 as C;
use proptest::prelude::*;

use filtered_spectra::algebra::{
    compass_quartic, compass_sf_relation, rank_one_eliminate, real_roots, resultant, BivariatePolynomial, MPoly,
    CURVE_TOL,
};
use filtered_spectra::colorsolve::{density_profile, ColorSolver};
use filtered_spectra::combinat::{enumerate_wigner_partitions, moments_by_enumeration, TreeIntegralMode};
use filtered_spectra::exact::{int, rat, Rational};
use filtered_spectra::kernel::evaluate_kernel;
use filtered_spectra::matrixlab::{sample_filtered_wigner, simulate_filtered, EntryLaw, SampleConfig};
use filtered_spectra::moments::theoretical_moments;
use filtered_spectra::numeric::sample_variance;
use filtered_spectra::{kernel_from_filter, validate_kernel, ColorPoint, Filter, Kernel};

/// Filters on `{-1,0,1}²` with `h(a,b) = h(-b,-a)` and small rational values.
fn filter_strategy() -> impl Strategy<Value = Filter> {
    proptest::collection::vec(-3i64..4, 9)
        .prop_map(|v| {
            let at = |a: i64, b: i64| v[((a + 1) * 3 + (b + 1)) as usize];
            let mut entries = vec![];
            for a in -1..=1 {
                for b in -1..=1 {
                    let val = rat(at(a, b) + at(-b, -a), 4);
                    entries.push((a, b, val));
                }
            }
            entries
        })
        .prop_filter_map("zero filter", |e| Filter::new(e).ok())
}

fn transform(h: &Filter, t1: f64, t2: f64) -> f64 {
    h.transform(t1, t2).norm_sqr()
}

fn small_poly() -> impl Strategy<Value = MPoly> {
    proptest::collection::vec(((0u32..3, 0u32..3), -4i64..5), 1..5).prop_map(|terms| {
        MPoly::from_terms(2, terms.into_iter().map(|((a, b), c)| (vec![a, b], int(c))))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn filter_kernel_is_squared_transform(h in filter_strategy(), pts in proptest::collection::vec((0.0..1.0f64, 0.0..6.3f64, 0.0..1.0f64, 0.0..6.3f64), 30)) {
        let k = kernel_from_filter(&h).unwrap();
        prop_assert!(validate_kernel(&k).is_valid());
        let l2: Rational = h.l2_norm_sq();
        prop_assert_eq!(k.l1_norm_exact(), l2);
        for (x, t1, y, t2) in pts {
            let v = evaluate_kernel(&k, ColorPoint::new(x, t1), ColorPoint::new(y, t2));
            let w = evaluate_kernel(&k, ColorPoint::new(y, t2), ColorPoint::new(x, t1));
            prop_assert!((v - transform(&h, t1, t2)).abs() < 1e-10);
            prop_assert!(v >= -1e-12);
            prop_assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_bounded_and_oracles_agree(h in filter_strategy()) {
        let k = kernel_from_filter(&h).unwrap();
        let a = k.a_bound();
        let m = theoretical_moments(&k, 8).unwrap();
        for (i, v) in m.iter().enumerate() {
            prop_assert!(v.abs() <= a.powi(i as i32 + 1) * (1.0 + 1e-12));
        }
        let q = moments_by_enumeration(&k, 8, TreeIntegralMode::Quadrature).unwrap();
        let l = moments_by_enumeration(&k, 8, TreeIntegralMode::FourierLattice).unwrap();
        for i in 0..8 {
            prop_assert!((q[i] - l[i]).abs() <= 1e-10 * m[i].abs().max(1.0));
            prop_assert!((q[i] - m[i]).abs() <= 1e-9 * m[i].abs().max(1.0));
        }
    }

    #[test]
    fn stieltjes_signs_and_conjugation(h in filter_strategy(), x in -3.0..3.0f64, y in 0.01..2.0f64) {
        let k = kernel_from_filter(&h).unwrap();
        let solver = ColorSolver::new(&k);
        let up = solver.solve_anywhere(C::new(x, y)).unwrap();
        let down = solver.solve_anywhere(C::new(x, -y)).unwrap();
        prop_assert!(up.residual < 1e-12);
        prop_assert!(down.residual < 1e-12);
        prop_assert!(up.stieltjes.im * down.stieltjes.im <= 0.0);
        prop_assert!((up.stieltjes.conj() - down.stieltjes).norm() < 1e-9);
    }

    #[test]
    fn resultant_is_multiplicative(p in small_poly(), q in small_poly(), r in small_poly()) {
        prop_assume!(p.degree_in(1) > 0 && q.degree_in(1) > 0 && r.degree_in(1) > 0);
        let qr = &q * &r;
        prop_assert_eq!(resultant(&p, &qr, 1).unwrap(), &resultant(&p, &q, 1).unwrap() * &resultant(&p, &r, 1).unwrap());
    }

    #[test]
    fn common_factor_iff_zero_resultant(f in small_poly(), g in small_poly()) {
        prop_assume!(!f.is_zero() && !g.is_zero());
        let shared = MPoly::from_terms(2, [(vec![0, 1], int(1)), (vec![0, 0], int(-2))]);
        let other = MPoly::from_terms(2, [(vec![0, 1], int(1)), (vec![0, 0], int(7))]);
        prop_assert!(resultant(&(&f * &shared), &(&g * &shared), 1).unwrap().is_zero());
        // res_Y(Y - 2, c) = ±c(X, 2), and c(X, 2) = 9 g(X, 2)
        let c = &g * &other;
        let lhs = resultant(&shared, &c, 1).unwrap();
        let g_at_2 = MPoly::from_terms(2, g.terms().map(|(e, v)| (vec![e[0], 0], v * Rational::from_integer(2.into()).pow(e[1] as i32))));
        let want = g_at_2.scale(&int(9));
        prop_assert!(lhs == want || lhs == -&want);
        prop_assert_eq!(lhs.is_zero(), g_at_2.is_zero());
    }
}

#[test]
fn resultant_detects_factor_free_pairs() {
    // Y - X and Y + X share no factor; Y^2 - X^2 and Y - X do
    let a = BivariatePolynomial::from_ints(&[(0, 1, 1), (1, 0, -1)]);
    let b = BivariatePolynomial::from_ints(&[(0, 1, 1), (1, 0, 1)]);
    let c = BivariatePolynomial::from_ints(&[(0, 2, 1), (2, 0, -1)]);
    assert!(!resultant(a.as_mpoly(), b.as_mpoly(), 1).unwrap().is_zero());
    assert!(resultant(a.as_mpoly(), c.as_mpoly(), 1).unwrap().is_zero());
}

#[test]
fn wigner_partition_invariants() {
    for k in (2..=12).step_by(2) {
        for p in enumerate_wigner_partitions(k) {
            let parts = p.parts();
            assert_eq!(parts.len(), k / 2 + 1);
            assert_eq!(p.edges().len(), k / 2);
            for i in 1..=k {
                assert_ne!(p.part_of(i), p.part_of(i + 1));
                let s = p.sigma(i);
                assert_ne!(s, i);
                assert_eq!(p.sigma(s), i);
            }
        }
    }
}

#[test]
fn even_kernel_density_is_symmetric() {
    let k = kernel_from_filter(&Filter::compass()).unwrap();
    let xs = [-1.7, -0.9, -0.3, 0.3, 0.9, 1.7];
    let g = density_profile(&k, &xs, (1e-2, 5e-3)).unwrap();
    for i in 0..3 {
        assert!((g.density[i] - g.density[5 - i]).abs() < 1e-6);
    }
}

#[test]
fn compass_curve_and_branch_points() {
    let k = kernel_from_filter(&Filter::compass()).unwrap();
    let cert = rank_one_eliminate(&compass_sf_relation(), &k).unwrap();
    assert!(cert.residual < CURVE_TOL);
    assert!(cert.curve.same_up_to_constant(&compass_quartic()));
    assert!(!cert.curve.discriminant_y().unwrap().is_zero());
    let locus = cert.curve.branch_locus().unwrap();
    let roots: Vec<f64> = real_roots(&locus).unwrap().iter().map(|r| r.approx).collect();
    assert_eq!(roots.len(), 3);
    assert!(roots[1].abs() < 1e-12);
    assert!((roots[2] - 2.540649362202).abs() < 1e-9);
    assert!((roots[0] + roots[2]).abs() < 1e-12);
}

#[test]
fn elimination_rejects_a_mismatched_kernel() {
    // the compass relation certified against s = 1 must not produce a curve
    assert!(rank_one_eliminate(&compass_sf_relation(), &Kernel::constant_one()).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let h = Filter::compass();
    let cfg = SampleConfig::new(60, 11, 1);
    let a = sample_filtered_wigner(&cfg, &h, 0).unwrap();
    let b = sample_filtered_wigner(&cfg, &h, 0).unwrap();
    assert_eq!(a.data(), b.data());
    let ea = simulate_filtered(&h, &cfg, 4).unwrap();
    let eb = simulate_filtered(&h, &cfg, 4).unwrap();
    assert_eq!(ea[0].eigenvalues, eb[0].eigenvalues);
    let rad = SampleConfig { entry_law: EntryLaw::Rademacher, ..cfg };
    assert_ne!(sample_filtered_wigner(&rad, &h, 0).unwrap().data(), a.data());
}

#[test]
fn moment_variance_shrinks_with_n() {
    let h = Filter::compass();
    let var_at = |n: usize| {
        let cfg = SampleConfig::new(n, 99, 12);
        let esds = simulate_filtered(&h, &cfg, 4).unwrap();
        let m4: Vec<f64> = esds.iter().map(|e| e.empirical_moments[4]).collect();
        sample_variance(&m4)
    };
    let (small, large) = (var_at(200), var_at(800));
    assert!(small / large > 2.0, "variance ratio {}", small / large);
}
