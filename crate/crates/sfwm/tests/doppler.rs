use proptest::prelude::*;
use sfwm::cli::{run_rates, Setup};
use sfwm::doppler::{fit_scaling, velocity_grid, velocity_grid_resolved, VelocityGrid, WarmSource, PANEL_FACTOR, PANEL_NODES};
use sfwm::model::{preset, BOLTZMANN, MASS_RB87};
use sfwm::spectra::{Source, SpectralModel};

fn moments(g: &VelocityGrid) -> (f64, f64, f64, f64) {
    let m = |p: i32| g.nodes.iter().zip(&g.weights).map(|(v, w)| w * v.powi(p)).sum::<f64>();
    (m(0), m(1), m(2), m(4))
}

#[test]
fn hermite_grid_reproduces_maxwellian_moments() {
    for t in [1e-4, 3.0, 300.0] {
        let g = velocity_grid(t, MASS_RB87, 16).unwrap();
        let s2 = BOLTZMANN * t / MASS_RB87;
        let (m0, m1, m2, m4) = moments(&g);
        assert!((m0 - 1.0).abs() < 1e-14);
        assert!(m1.abs() < 1e-14 * s2.sqrt());
        assert!((m2 / s2 - 1.0).abs() < 1e-12);
        assert!((m4 / (3.0 * s2 * s2) - 1.0).abs() < 1e-12);
        assert!((g.rms_speed() - s2.sqrt()).abs() < 1e-14 * s2.sqrt());
    }
}

#[test]
fn resolved_grid_reproduces_maxwellian_moments() {
    let (s, d) = preset("rb87_warm_tu").unwrap();
    for (t, d2) in [(3.0, 0.0), (300.0, 0.0), (300.0, 40.0)] {
        let drive = sfwm::model::DriveConfig { delta2: d2, ..d.clone() };
        let g = velocity_grid_resolved(&s, &drive, t, PANEL_NODES, PANEL_FACTOR).unwrap();
        let s2 = BOLTZMANN * t / MASS_RB87;
        let (m0, m1, m2, m4) = moments(&g);
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!(m1.abs() < 1e-6 * s2.sqrt(), "T {t}: mean {m1}");
        assert!((m2 / s2 - 1.0).abs() < 1e-6, "T {t}: {}", m2 / s2);
        assert!((m4 / (3.0 * s2 * s2) - 1.0).abs() < 1e-5);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.weights.iter().all(|w| *w >= 0.0));
    }
}

#[test]
fn grid_errors() {
    let (s, d) = preset("rb87_warm_tu").unwrap();
    assert!(velocity_grid(0.0, MASS_RB87, 16).is_err());
    assert!(velocity_grid(-1.0, MASS_RB87, 16).is_err());
    assert!(velocity_grid(300.0, MASS_RB87, 4).is_err());
    assert!(velocity_grid_resolved(&s, &d, 0.0, 8, 4.0).is_err());
    assert!(velocity_grid_resolved(&s, &d, 300.0, 1, 4.0).is_err());
    assert!(velocity_grid_resolved(&s, &d, 300.0, 8, 0.0).is_err());
}

#[test]
fn scaling_fit_recovers_synthetic_law() {
    let od: Vec<f64> = [10.0, 30.0, 100.0, 300.0, 1000.0].to_vec();
    let tau: Vec<f64> = od.iter().map(|o| 2.5 / (1.0 + 0.04 * o)).collect();
    let (t0, x) = fit_scaling(&od, &tau).unwrap();
    assert!((t0 - 2.5).abs() < 1e-9);
    assert!((x - 0.04).abs() < 1e-9);

    assert!(fit_scaling(&od[..1], &tau[..1]).is_err());
    assert!(fit_scaling(&od, &tau[..3]).is_err());
    assert!(fit_scaling(&[10.0, -1.0], &[1.0, 1.0]).is_err());
    // A flat law drives x to the edge of the search range.
    assert!(fit_scaling(&od, &vec![1.0; od.len()]).is_err());
}

#[test]
fn resting_class_reproduces_cold_coefficients() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let warm = WarmSource::new(&s, &d, &VelocityGrid::single(0.0, s.mass)).unwrap();
    let cold = Source::new(&s, &d).unwrap();
    for w in [-20.0, -0.4, 0.3, 7.0] {
        let a = warm.averaged_coefficients(w).unwrap();
        let b = cold.kernel(w).unwrap().pc;
        for (x, y) in [(a.gamma_i, b.gamma_i), (a.kappa_s, b.kappa_s), (a.kappa_i, b.kappa_i), (a.g_s, b.g_s)] {
            assert!((x - y).norm() < 1e-13 * y.norm().max(1e-300));
        }
    }
}

#[test]
fn ultracold_ensemble_matches_cold_rates() {
    let setup = Setup::from_preset("rb87_1529_780").unwrap();
    let cold = run_rates(&setup).unwrap();
    let warm = run_rates(&setup.with_temperature(1e-7)).unwrap();
    assert!((warm.r_s / cold.r_s - 1.0).abs() < 1e-3, "{warm:?} vs {cold:?}");
    assert!((warm.r_i / cold.r_i - 1.0).abs() < 1e-3);
    assert!((warm.r_sp / cold.r_sp - 1.0).abs() < 1e-3);
    assert_eq!(warm.r_p, warm.r_ip);
    assert_eq!(cold.r_p, cold.r_sp);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_fit_is_exact_on_the_model(t0 in 0.1f64..10.0, lx in (1e-4f64).ln()..(1.0f64).ln()) {
        let x = lx.exp();
        let od = [5.0, 20.0, 80.0, 250.0, 900.0];
        let tau: Vec<f64> = od.iter().map(|o| t0 / (1.0 + x * o)).collect();
        let (a, b) = fit_scaling(&od, &tau).unwrap();
        prop_assert!((a / t0 - 1.0).abs() < 1e-7);
        prop_assert!((b / x - 1.0).abs() < 1e-7);
    }
}
