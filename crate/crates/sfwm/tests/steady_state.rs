use num_complex::Complex64 as C;
use proptest::prelude::*;
use sfwm::coefficients::DopplerShift;
use sfwm::model::{preset, DriveConfig, PRESET_NAMES};
use sfwm::steady_state::{gsa_steady, solve_steady, SteadyState};
use sfwm::SfwmError;

fn check_physical(st: &SteadyState) {
    assert!((st.trace() - C::new(1.0, 0.0)).norm() < 1e-10);
    assert!(st.hermiticity_error() < 1e-12);
    for j in 1..=4 {
        let p = st.s(j, j);
        assert!(p.im.abs() < 1e-12);
        assert!((-1e-12..=1.0 + 1e-12).contains(&p.re), "σ{j}{j} = {p}");
    }
}

#[test]
fn undriven_atom_sits_in_ground_state() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let st = solve_steady(&s, &d.with_rabi(0.0), None).unwrap();
    let g = SteadyState::ground();
    for j in 0..4 {
        for k in 0..4 {
            assert!((st.sigma[j][k] - g.sigma[j][k]).norm() < 1e-14);
        }
    }
}

#[test]
fn presets_are_physical_and_mostly_ground() {
    for name in PRESET_NAMES {
        let (s, d) = preset(name).unwrap();
        let st = solve_steady(&s, &d, None).unwrap();
        check_physical(&st);
        assert!(st.pop(1) > 0.96, "{name}: σ11 = {}", st.pop(1));
        assert!((2..=4).all(|j| st.pop(j) < 0.01), "{name}");
    }
}

#[test]
fn two_level_light_shift_asymptote() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let drive = DriveConfig { omega_c: C::new(1.0, 0.0), omega_d: C::new(0.0, 0.0), delta1: -5000.0, ..d };
    let st = solve_steady(&s, &drive, None).unwrap();
    assert!((st.s(1, 2) - C::new(1e-4, 0.0)).norm() < 1e-6);
}

#[test]
fn gsa_closed_form() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let g41 = s.decoherence().g41;
    let st = gsa_steady(&s, &d).unwrap();
    let want = C::new(0.0, 1.0) / (2.0 * g41 * 50.0);
    assert!((st.s(1, 4) - want).norm() < 1e-15);
    assert_eq!(st.s(4, 1), want.conj());
    assert_eq!(st.s(1, 2), C::new(0.01, 0.0));
    let dark = gsa_steady(&s, &DriveConfig { omega_d: C::new(0.0, 0.0), ..d.clone() }).unwrap();
    assert_eq!(dark.s(1, 4), C::new(0.0, 0.0));
    assert!(matches!(gsa_steady(&s, &DriveConfig { delta1: 0.0, ..d }), Err(SfwmError::Domain(_))));
}

#[test]
fn full_solve_approaches_gsa() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let drive = DriveConfig { delta1: -5000.0, ..d };
    let full = solve_steady(&s, &drive, None).unwrap();
    let gsa = gsa_steady(&s, &drive).unwrap();
    for j in 0..4 {
        for k in 0..4 {
            assert!((full.sigma[j][k] - gsa.sigma[j][k]).norm() <= 1e-3);
        }
    }
}

#[test]
fn undamped_driven_system_is_degenerate() {
    let (mut s, d) = preset("rb87_1529_780").unwrap();
    s.gamma21 = 0.0;
    s.gamma31 = 0.0;
    s.gamma42 = 0.0;
    s.gamma43 = 0.0;
    assert!(matches!(solve_steady(&s, &d, None), Err(SfwmError::DegenerateSteadyState)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_drives_are_physical(
        rabi in 0.0f64..20.0,
        d1 in -200.0f64..200.0,
        d2 in -5.0f64..5.0,
        d3 in -5.0f64..5.0,
    ) {
        let (s, d) = preset("rb87_1529_780").unwrap();
        let shift = DopplerShift { delta1: d1, delta2: d2, delta3: d3 };
        let st = solve_steady(&s, &d.with_rabi(rabi), Some(&shift)).unwrap();
        check_physical(&st);
    }

    #[test]
    fn continuous_in_detunings(d1 in -100.0f64..-2.0, d2 in -3.0f64..3.0) {
        let (s, d) = preset("rb87_1529_780").unwrap();
        let d = d.with_rabi(3.0);
        let at = |x: f64| solve_steady(&s, &d, Some(&DopplerShift { delta1: x, delta2: d2, delta3: 0.0 })).unwrap();
        let (a, b, c) = (at(d1 - 1e-6), at(d1), at(d1 + 1e-6));
        for j in 0..4 {
            for k in 0..4 {
                let mid = (a.sigma[j][k] + c.sigma[j][k]) * 0.5;
                prop_assert!((mid - b.sigma[j][k]).norm() <= 1e-10);
            }
        }
    }
}
