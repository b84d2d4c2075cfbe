mod common;

use actdeg::lti::{frequency_response, h2_norm, h2_norm_frequency_integral, hinf_norm, hinf_norm_grid, log_grid};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn dense_grid(a: &DMatrix<f64>) -> Vec<f64> {
    let (lo, hi) = common::band(a);
    log_grid(lo * 10.0, hi / 10.0, 10_000)
}

#[test]
fn hinf_bisection_matches_dense_grid() {
    let mut rng = common::rng(11);
    for case in 0..30 {
        let nx = rng.gen_range(1..=6);
        let (m, p) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = common::hurwitz(&mut rng, nx);
        let b = common::gaussian(&mut rng, nx, m);
        let c = common::gaussian(&mut rng, p, nx);
        let exact = hinf_norm(&a, &b, &c, 1e-9).unwrap().value;
        let grid = hinf_norm_grid(&a, &b, &c, &dense_grid(&a)).unwrap().value;
        let rel = (exact - grid).abs() / exact;
        assert!(rel <= 1e-3, "case {case}: bisection {exact} vs grid {grid}");
        assert!(grid <= exact * (1.0 + 1e-9), "case {case}: grid above bisection");
    }
}

#[test]
fn h2_gramian_matches_frequency_integral() {
    let mut rng = common::rng(12);
    for case in 0..30 {
        let nx = rng.gen_range(1..=6);
        let (m, p) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = common::hurwitz(&mut rng, nx);
        let b = common::gaussian(&mut rng, nx, m);
        let c = common::gaussian(&mut rng, p, nx);
        let lyap = h2_norm(&a, &b, &c).unwrap().value;
        let integral = h2_norm_frequency_integral(&a, &b, &c, 20_000).unwrap().value;
        let rel = (lyap - integral).abs() / lyap;
        assert!(rel <= 5e-3, "case {case}: gramian {lyap} vs integral {integral}");
    }
}

#[test]
fn f16_open_loop_disturbance_gain() {
    // d -> z of the bundled model, with the disturbance scaled by Wd
    let sys = actdeg::f16::plant();
    let b = &sys.bd * actdeg::f16::WD;
    let n = hinf_norm(&sys.a, &b, &sys.cz, 1e-9).unwrap().value;
    assert!((n - 0.0315).abs() < 5e-4, "{n}");
}

/// This plant stalled nalgebra's Schur iteration.
#[test]
fn hinf_terminates_where_schur_stalls() {
    let mut rng = common::rng(7);
    let nx = rng.gen_range(1..=5);
    let a = common::hurwitz(&mut rng, nx);
    let b = common::gaussian(&mut rng, nx, 2);
    let c = common::gaussian(&mut rng, 2, nx);
    let exact = hinf_norm(&a, &b, &c, 1e-9).unwrap().value;
    let grid = hinf_norm_grid(&a, &b, &c, &dense_grid(&a)).unwrap().value;
    assert!((exact - grid).abs() <= 1e-3 * exact, "{exact} vs {grid}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norms_scale_linearly(seed in any::<u64>(), alpha in 0.01..100.0f64) {
        let mut rng = common::rng(seed);
        let nx = rng.gen_range(1..=5);
        let a = common::hurwitz(&mut rng, nx);
        let b = common::gaussian(&mut rng, nx, 2);
        let c = common::gaussian(&mut rng, 2, nx);
        let h2 = h2_norm(&a, &b, &c).unwrap().value;
        let h2s = h2_norm(&a, &(&b * alpha), &c).unwrap().value;
        prop_assert!((h2s - alpha * h2).abs() <= 1e-8 * alpha * h2.max(1e-12));
        let hi = hinf_norm(&a, &b, &c, 1e-9).unwrap().value;
        let his = hinf_norm(&a, &b, &(&c * alpha), 1e-9).unwrap().value;
        prop_assert!((his - alpha * hi).abs() <= 1e-6 * alpha * hi);
    }

    #[test]
    fn hinf_bounds_every_frequency_sample(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let nx = rng.gen_range(1..=5);
        let a = common::hurwitz(&mut rng, nx);
        let b = common::gaussian(&mut rng, nx, 2);
        let c = common::gaussian(&mut rng, 3, nx);
        let hi = hinf_norm(&a, &b, &c, 1e-9).unwrap().value;
        let omegas = log_grid(1e-3, 1e3, 200);
        for g in frequency_response(&a, &b, &c, &omegas).unwrap() {
            let s = g.singular_values().max();
            prop_assert!(s <= hi * (1.0 + 1e-8));
        }
    }

    #[test]
    fn similarity_transform_preserves_norms(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let nx = rng.gen_range(2..=5);
        let a = common::hurwitz(&mut rng, nx);
        let b = common::gaussian(&mut rng, nx, 1);
        let c = common::gaussian(&mut rng, 2, nx);
        let t = common::gaussian(&mut rng, nx, nx) + DMatrix::identity(nx, nx) * 3.0;
        let Some(ti) = t.clone().try_inverse() else { return Ok(()) };
        prop_assume!(t.singular_values().min() > 0.5);
        let (a2, b2, c2) = (&t * &a * &ti, &t * &b, &c * &ti);
        let h = h2_norm(&a, &b, &c).unwrap().value;
        let h2 = h2_norm(&a2, &b2, &c2).unwrap().value;
        prop_assert!((h - h2).abs() <= 1e-7 * h.max(1.0));
        let i1 = hinf_norm(&a, &b, &c, 1e-9).unwrap().value;
        let i2 = hinf_norm(&a2, &b2, &c2, 1e-9).unwrap().value;
        prop_assert!((i1 - i2).abs() <= 1e-6 * i1.max(1.0));
    }
}
