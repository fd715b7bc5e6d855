mod common;

use droneloc::crlb::{crlb, crlb_cofactor, crlb_trace, fim_total};
use droneloc::estimators::fim_single;
use droneloc::{Axes, Error, Mat3, Vec3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cofactor_form_matches_inverse_trace(seed in 0u64..100_000, dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_spd(&mut rng, dim, 3.0);
        let axes = Axes([dim >= 1, dim >= 2, dim >= 3]);
        let mut padded = f;
        for i in dim..3 {
            padded[i][i] = 123.0;
        }
        let want = common::trace(&common::inverse(&f, dim), dim);
        let m = Mat3(padded);
        prop_assert!((crlb_cofactor(&m, axes).unwrap() - want).abs() <= 1e-10 * want);
        prop_assert!((crlb_trace(&m, axes).unwrap() - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn fim_matches_outer_product(seed in 0u64..10_000) {
        let sc = common::random_scenario(3, 8, seed);
        for u in &sc.uavs {
            let wps = u.plan.positions();
            let f = fim_single(&u.channel, &wps, &sc.emitter).unwrap();
            let want = common::outer_product_fim(&u.channel, &wps, &sc.emitter);
            prop_assert!(common::frobenius_rel(&f.0, &want) <= 1e-12);
            let ev = f.symmetric_eigenvalues();
            prop_assert!(ev[0] >= -1e-10 * ev[2]);
        }
    }
}

#[test]
fn fim_matches_monte_carlo_hessian() {
    let sc = common::random_scenario(1, 8, 11);
    let u = &sc.uavs[0];
    let wps = u.plan.positions();
    let f = fim_single(&u.channel, &wps, &sc.emitter).unwrap();
    let mc = common::mc_fim(&u.channel, &wps, &sc.emitter, 2_000, 11, |m, x| m.log_likelihood(x).unwrap());
    assert!(common::frobenius_rel(&f.0, &mc) < 0.02);
}

#[test]
fn doubling_sigma_scales_crlb_root_by_sqrt2() {
    for seed in 0..10 {
        let sc = common::random_scenario(4, 8, seed);
        let base = crlb(&sc, &sc.emitter).unwrap();
        let wide = crlb(&common::with_noise_var(sc.clone(), 4.0 * 6.0), &sc.emitter).unwrap();
        assert!((wide.sqrt() / base.sqrt() - 2.0).abs() < 1e-12);
        let twice_var = crlb(&common::with_noise_var(sc.clone(), 12.0), &sc.emitter).unwrap();
        assert!((twice_var.sqrt() / base.sqrt() - 2f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn crlb_is_translation_invariant() {
    let sc = common::random_scenario(4, 8, 21);
    let off = Vec3::new(1500.0, -700.0, 0.0);
    let moved = sc.translated(off);
    let a = crlb(&sc, &sc.emitter).unwrap();
    let b = crlb(&moved, &moved.emitter).unwrap();
    assert!((a - b).abs() <= 1e-9 * a);
}

#[test]
fn adding_a_uav_never_raises_the_bound() {
    for seed in 0..20 {
        let sc = common::random_scenario(5, 8, 300 + seed);
        let mut fewer = sc.clone();
        fewer.uavs.pop();
        assert!(crlb(&sc, &sc.emitter).unwrap() <= crlb(&fewer, &sc.emitter).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn total_is_sum_of_per_uav() {
    let sc = common::random_scenario(4, 8, 8);
    let rep = fim_total(&sc, &sc.emitter).unwrap();
    let mut sum = [[0.0; 3]; 3];
    for f in &rep.per_uav {
        for r in 0..3 {
            for c in 0..3 {
                sum[r][c] += f.0[r][c];
            }
        }
    }
    assert!(common::frobenius_rel(&rep.total.0, &sum) < 1e-14);
}

#[test]
fn unobservable_geometry_is_an_error() {
    let f = Mat3::diagonal(Vec3::new(1.0, 0.0, 1.0));
    assert!(matches!(crlb_trace(&f, Axes::ALL), Err(Error::Unobservable { .. })));
    assert!(matches!(crlb_cofactor(&f, Axes::ALL), Err(Error::Unobservable { .. })));
}
