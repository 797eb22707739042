mod common;

use num_complex::Complex64 as C;
use sfwm::correlations::analytic_wavefunction;
use sfwm::model::{preset, DriveConfig};
use sfwm::spectra::{pairing_rate, pairing_rate_analytic};

use common::{pairing_integral, unit_wavefunction};

#[test]
fn pairing_rate_closed_form_matches_quadrature() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let dec = s.decoherence();
    let ratios: Vec<f64> = [10.0, 30.0, 100.0, 300.0, 1000.0]
        .iter()
        .map(|&od| {
            let u = od * s.coupling31() / 4.0;
            let (full, _) = pairing_rate_analytic(&s, &d.with_od(od)).unwrap();
            full / pairing_integral(u, dec.g31 / 2.0)
        })
        .collect();
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 5e-3, "{ratios:?}");
    }
}

#[test]
fn asymptotic_rate_approaches_full() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let (full, asym) = pairing_rate_analytic(&s, &d.with_od(1e5)).unwrap();
    assert!((asym / full - 1.0).abs() < 0.01, "{full} {asym}");
    let (full, asym) = pairing_rate_analytic(&s, &d.with_od(1e7)).unwrap();
    assert!((asym / full - 1.0).abs() < 1e-3);
    assert!(pairing_rate_analytic(&s, &DriveConfig { delta1: 0.0, ..d }).is_err());
}

#[test]
fn analytic_rate_tracks_numeric_at_high_od() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    for od in [30.0, 100.0] {
        let drive = d.with_od(od);
        let numeric = pairing_rate(&s, &drive).unwrap();
        let (full, _) = pairing_rate_analytic(&s, &drive).unwrap();
        assert!((full / numeric - 1.0).abs() < 0.05, "od {od}: {full:e} vs {numeric:e}");
    }
}

#[test]
fn analytic_wavefunction_matches_fourier_quadrature() {
    let (s, d) = preset("rb87_1529_780").unwrap();
    let drive = d.with_od(50.0);
    let dec = s.decoherence();
    let u = drive.od * s.coupling31() / 4.0;
    let ratio = C::new(0.0, 1.0) * (s.s_lambda * s.coupling43() / s.coupling31()).sqrt() * drive.omega_c * drive.omega_d
        / (2.0 * drive.delta1 * C::new(dec.g41, -2.0 * drive.delta2));
    for ut in [2.0, 5.0] {
        let psi = analytic_wavefunction(&s, &drive, &[ut / u]).unwrap()[0] / ratio / u;
        let want = unit_wavefunction(ut);
        assert!((psi - want).norm() < 1e-6 * want.norm(), "uτ = {ut}: {psi} vs {want}");
    }
}
