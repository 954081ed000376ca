mod common;

use std::f64::consts::TAU;
use std::sync::Arc;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use tft_core::diffapprox::{approximate_pl, dyadic_between, dyadic_interpolation, sup_error, Diffeo, Mode};
use tft_core::Dyadic;

fn random_diffeo(seed: u64) -> Diffeo {
    let mut r = rng(seed);
    let a: f64 = r.random_range(-0.9..0.9);
    match r.random_range(0..3) {
        0 => Diffeo::new(Arc::new(move |x| x + a * x * (1.0 - x)), Mode::Interval),
        1 => Diffeo::new(Arc::new(move |x| x + a * (TAU * x).sin() / TAU), Mode::Interval),
        _ => {
            let theta: f64 = r.random_range(0.0..1.0);
            Diffeo::new(Arc::new(move |x| x + theta + a * (TAU * x).sin() / TAU), Mode::Circle)
        }
    }
}

proptest! {
    #![proptest_config(common::config(40))]

    #[test]
    fn approximants_are_valid_and_close(seed in any::<u64>(), e in 0usize..3) {
        let eps = [0.2, 0.05, 0.01][e];
        let f = random_diffeo(seed);
        let pl = approximate_pl(&f, eps).unwrap();
        prop_assert!(pl.validate().is_ok());
        prop_assert!(sup_error(&f, &pl, 10_000) < eps / 3.0 + eps / 2.0);
    }

    #[test]
    fn interpolation_joins_endpoints(m1 in 1i128..64, k1 in 0u32..6, m2 in 1i128..64, k2 in 0u32..6, x0 in 0i128..16, y0 in 0i128..16) {
        let p = (Dyadic::new(x0, 4), Dyadic::new(y0, 4));
        let q = (p.0 + Dyadic::new(m1, k1), p.1 + Dyadic::new(m2, k2));
        let pts = dyadic_interpolation(p, q).unwrap();
        prop_assert_eq!(pts[0], p);
        prop_assert_eq!(*pts.last().unwrap(), q);
        for w in pts.windows(2) {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            prop_assert!(dx.is_positive() && dy.is_positive());
            let slope = (dy.to_f64() / dx.to_f64()).log2();
            prop_assert_eq!(slope, slope.round());
        }
    }

    #[test]
    fn dyadic_between_is_strictly_inside(p in -4.0f64..4.0, w in 1e-9f64..2.0) {
        let x = dyadic_between(p, p + w).unwrap().to_f64();
        prop_assert!(p < x && x < p + w);
    }
}
