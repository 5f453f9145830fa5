use proptest::prelude::*;
use tpcalc::morse::*;
use tpcalc::q::{q, qi, to_f64};
use tpcalc::Q;

/// Local extrema of the sampled function, counted directly on the grid.
fn sampled_extrema(f: &PiecewiseProfile, n: usize) -> usize {
    let v: Vec<f64> = f.samples(n).into_iter().map(|p| p.1).collect();
    (0..n)
        .filter(|&i| {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            (b > a && b >= c) || (b < a && b <= c)
        })
        .count()
}

#[test]
fn small_variation_profile() {
    let f = build_1d(q(1, 10), q(1, 2), q(1, 1000), qi(1)).unwrap();
    let r = verify(&f, 10_000);
    assert!(r.passed(), "{:?}", r.failures);
    assert!(r.critical_points >= 10);
    assert!(r.variation <= q(1, 10));
    assert_eq!(r.min, Q::from_integer(0));
    assert_eq!(sampled_extrema(&f, 10_000), r.critical_points);
    assert!(r.min_gradient_outside >= 0.5);
}

#[test]
fn large_variation_needs_no_folding() {
    let f = build_1d(q(1, 2), q(1, 2), q(1, 100), qi(1)).unwrap();
    assert_eq!(f.critical_points(), 2);
    assert!(verify(&f, 4096).passed());
}

#[test]
fn constant_function_fails() {
    let f = PiecewiseProfile::constant(qi(1), q(1, 10), q(1, 2), q(1, 100)).unwrap();
    let r = verify(&f, 1000);
    assert!(!r.passed());
    assert!(r.failures.iter().any(|s| s.contains("below δ")));
}

#[test]
fn infeasible_parameters() {
    assert!(build_1d(q(1, 100), q(1, 2), q(1, 10), qi(1)).is_err());
    assert!(build_1d(q(1, 10), qi(1), q(1, 1000), qi(1)).is_err());
    assert!(build_1d(qi(0), q(1, 2), q(1, 1000), qi(1)).is_err());
}

#[test]
fn folding_halves_variation() {
    let f = PiecewiseProfile::standard(qi(1), qi(1), qi(1), q(1, 2), q(1, 200), q(1, 100)).unwrap();
    let g = fold_step(&f, &[q(1, 4)]).unwrap();
    assert_eq!(g.critical_points(), 4);
    let eps = q(1, 100);
    assert!(g.variation() <= f.variation() / qi(2) + eps && g.variation() >= f.variation() / qi(2) - eps);
    assert_eq!(fold_step(&f, &[]).unwrap(), f);
    // a cut through a cap is refused
    let top = f.kinks[1].corner;
    assert!(fold_step(&f, &[top - q(1, 1000)]).is_err());
    assert!(fold_step(&f, &[top]).is_err());
    let h = fold_step(&g, &[q(1, 8)]).unwrap();
    assert_eq!(h.critical_points(), 8);
}

#[test]
fn shrinking_bounds_the_gradient_inside() {
    let f = PiecewiseProfile::standard(qi(1), qi(1), qi(1), q(1, 2), q(1, 100), q(1, 20)).unwrap();
    let g = shrink_step(&f, 0, q(1, 100)).unwrap();
    let eta = 0.01;
    for i in -100..=100 {
        let x = eta * i as f64 / 100.0;
        assert!(g.eval(x).1.abs() <= 0.5 + 1e-12);
    }
    for i in 1..=400 {
        let x = eta + (0.05 - eta) * i as f64 / 400.0;
        assert!(g.eval(x).1.abs() >= 0.5 - 1e-12);
        assert!(g.eval(-x).1.abs() >= 0.5 - 1e-12);
    }
    assert!(shrink_step(&f, 0, q(1, 10)).is_err());
    assert!(shrink_step(&f, 7, q(1, 100)).is_err());
}

#[test]
fn critical_count_grows_like_inverse_variation() {
    for den in [4i64, 10, 20, 50, 100] {
        let f = build_1d(q(1, den), q(1, 2), q(1, 100_000), qi(1)).unwrap();
        assert!(f.critical_points() as i64 >= den, "K = 1/{den}");
        assert!(verify(&f, 20_000).passed());
    }
}

#[test]
fn torus_profile() {
    let t = build_torus(q(1, 10), q(1, 2), q(1, 1000), qi(1), qi(1)).unwrap();
    let r = verify_torus(&t, 512);
    assert!(r.passed(), "{:?}", r.failures);
    assert!(r.variation <= q(1, 10));
    assert_eq!(r.critical_points, t.u.critical_points() * t.w.critical_points());
}

#[test]
fn csv_dump() {
    let f = build_1d(q(1, 4), q(1, 2), q(1, 100), qi(1)).unwrap();
    let csv = f.to_csv(4);
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("sample,value\n0,0\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn built_profiles_verify(kd in 3i64..40, dn in 1i64..9, circ in 1i64..4) {
        let k = q(1, kd);
        let delta = q(dn, 10);
        let f = build_1d(k, delta, q(1, 10_000), qi(circ)).unwrap();
        let r = verify(&f, 8000);
        prop_assert!(r.passed(), "{:?}", r.failures);
        prop_assert!(to_f64(&r.variation) <= to_f64(&k));
        // at least one monotone segment per K of ascent
        prop_assert!(f.critical_points() as i64 * kd >= circ);
    }
}
