use proptest::prelude::*;
use qle_core::generator::{CouplingRange, MediumSpec};
use qle_core::scattering::{single_photon, t2_analytic};

fn chain(n: usize, jx: f64, gamma: f64) -> MediumSpec {
    MediumSpec::uniform(n, 1.0).with_couplings(jx, 0.05).with_baths(gamma, gamma)
}

#[test]
fn two_atom_closed_form() {
    let mut spec = MediumSpec::uniform(2, 1.0).with_couplings(0.07, 0.3).with_baths(0.08, 0.12);
    spec.omega = vec![0.9, 1.15];
    for k in 0..50 {
        let wp = 0.6 + 0.8 * k as f64 / 49.0;
        let t = single_photon(&spec, wp).unwrap().t;
        let exact = t2_analytic(wp, 0.9, 1.15, 0.07, 0.08, 0.12);
        assert!((t - exact).norm() <= 1e-12 * exact.norm().max(1e-300));
    }
}

#[test]
fn matched_long_chain_is_transparent() {
    let r = single_photon(&chain(50, 0.05, 0.1), 1.0).unwrap();
    assert!((r.transmission() - 1.0).abs() < 1e-10);
    assert!(r.reflection() < 1e-10);
    assert_eq!(r.e_k.len(), 50);
}

#[test]
fn interaction_does_not_enter() {
    let a = single_photon(&chain(6, 0.05, 0.1), 1.02).unwrap();
    let b = single_photon(&chain(6, 0.05, 0.1).with_couplings(0.05, 0.9), 1.02).unwrap();
    assert_eq!(a, b);
}

#[test]
fn split_peaks_for_strong_exchange() {
    // 2Jx > Γ on identical atoms: the line center is a local minimum between two maxima
    let t2 = |wp: f64| t2_analytic(wp, 1.0, 1.0, 0.1, 0.1, 0.1).norm_sqr();
    let center = t2(1.0);
    let grid: Vec<f64> = (0..801).map(|k| 0.8 + 0.4 * k as f64 / 800.0).collect();
    let left = grid.iter().filter(|&&w| w < 1.0).map(|&w| t2(w)).fold(0.0, f64::max);
    let right = grid.iter().filter(|&&w| w > 1.0).map(|&w| t2(w)).fold(0.0, f64::max);
    assert!(left > center + 0.1 && right > center + 0.1);
    // 2Jx <= Γ merges them
    let merged = |wp: f64| t2_analytic(wp, 1.0, 1.0, 0.05, 0.1, 0.1).norm_sqr();
    assert!(grid.iter().all(|&w| merged(w) <= merged(1.0) + 1e-15));
}

#[test]
fn mismatched_chain_oscillates_without_decay() {
    let ts: Vec<f64> = (10..=50).map(|n| single_photon(&chain(n, 0.08, 0.1), 1.0).unwrap().transmission()).collect();
    let (lo, hi) = ts.iter().fold((f64::MAX, f64::MIN), |(a, b), &t| (a.min(t), b.max(t)));
    assert!(hi - lo > 1e-2);
    // at the band center the pattern has period two in N: each parity class shows no trend
    for parity in 0..2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            (10..=50usize).zip(&ts).filter(|(n, _)| n % 2 == parity).map(|(n, t)| ((n as f64).ln(), t.ln())).unzip();
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope.abs() < 1e-6, "slope {slope}");
    }
}

#[test]
fn steep_power_law_matches_tridiagonal() {
    for n in [3, 8, 20] {
        let nn = chain(n, 0.06, 0.1);
        let lr = nn.clone().with_range(CouplingRange::LongRange { alpha: 20.0, beta: 3.0, terms: 1 });
        for wp in [0.9, 1.0, 1.07] {
            let a = single_photon(&nn, wp).unwrap();
            let b = single_photon(&lr, wp).unwrap();
            let (dt, dr) = ((a.transmission() - b.transmission()).abs(), (a.reflection() - b.reflection()).abs());
            assert!(dt < 1e-6 && dr < 1e-6, "n={n} wp={wp} dT={dt:e} dR={dr:e}");
        }
    }
}

proptest! {
    #[test]
    fn flux_is_conserved(
        n in 1usize..=50,
        jx in 0.0f64..0.3,
        gl in 0.01f64..0.3,
        gr in 0.01f64..0.3,
        wp in 0.5f64..1.5,
        alpha in prop::option::of(0.5f64..6.0),
    ) {
        let mut spec = MediumSpec::uniform(n, 1.0).with_couplings(jx, 0.0).with_baths(gl, gr);
        spec.omega = (0..n).map(|i| 1.0 + 0.03 * ((i * 7 % 5) as f64 - 2.0)).collect();
        if let Some(alpha) = alpha {
            spec = spec.with_range(CouplingRange::LongRange { alpha, beta: 1.0, terms: 1 });
        }
        let r = single_photon(&spec, wp).unwrap();
        prop_assert!((r.transmission() + r.reflection() - 1.0).abs() < 1e-10);
        prop_assert!(r.e_k.iter().all(|e| e.re.is_finite() && e.im.is_finite()));
    }
}
