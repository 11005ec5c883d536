use proptest::prelude::*;
use qle_core::longrange_fit::{fit_powerlaw, ExpFit};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residual_is_monotone_in_terms(u in 0.5f64..4.0, rmax in 4usize..=12) {
        let mut prev = f64::INFINITY;
        for l in 1..=3 {
            let f = fit_powerlaw(u, l, rmax).unwrap();
            prop_assert!(f.residual() <= prev + 1e-12);
            prop_assert!(f.delta().iter().all(|&d| d > 0.0 && d < 1.0));
            prop_assert!(f.residual() >= 0.0);
            prev = f.residual();
        }
    }

    #[test]
    fn nearest_separation_is_reproduced(u in 0.5f64..6.0, l in 1usize..=3, rmax in 3usize..=10) {
        let f = fit_powerlaw(u, l, rmax.max(l)).unwrap();
        let rms = (f.residual() / f.rmax() as f64).sqrt();
        prop_assert!((f.eval(1) - 1.0).abs() <= 10.0 * rms + 1e-9);
    }

    #[test]
    fn canonical_form_ignores_term_order(u in 0.5f64..4.0, rot in 0usize..3) {
        let f = fit_powerlaw(u, 3, 8).unwrap();
        let mut g: Vec<f64> = f.gamma().to_vec();
        let mut d: Vec<f64> = f.delta().to_vec();
        g.rotate_left(rot);
        d.rotate_left(rot);
        let shuffled = ExpFit::from_parts(u, g, d, 8).unwrap();
        let (a, b) = (shuffled.canonical(), f.canonical());
        prop_assert_eq!(a.delta(), b.delta());
        prop_assert_eq!(a.gamma(), b.gamma());
        prop_assert!((shuffled.residual() - f.residual()).abs() < 1e-15);
    }

    #[test]
    fn fit_is_deterministic(u in 0.5f64..4.0, l in 1usize..=3) {
        let a = fit_powerlaw(u, l, 9).unwrap();
        let b = fit_powerlaw(u, l, 9).unwrap();
        prop_assert_eq!(a.gamma(), b.gamma());
        prop_assert_eq!(a.delta(), b.delta());
    }
}
