mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64 as C;
use proptest::prelude::*;
use sfwm::specfun::{bessel_k, bessel_k01, erf, kelvin_k1, kelvin_pair};
use sfwm::SfwmError;

use common::k_oracle;

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn real_axis_reference_values() {
    let cases = [
        (1.0, 0.421_024_438_240_708_3, 0.601_907_230_197_234_6),
        (10.0, 1.778_006_231_616_918e-5, 1.864_877_345_382_558e-5),
    ];
    for (x, k0, k1) in cases {
        let (a, b) = bessel_k01(C::new(x, 0.0)).unwrap();
        assert!((a.re - k0).abs() < 1e-13 * k0 && a.im.abs() < 1e-13 * k0, "K0({x}) = {a}");
        assert!((b.re - k1).abs() < 1e-13 * k1 && b.im.abs() < 1e-13 * k1, "K1({x}) = {b}");
    }
}

#[test]
fn oracle_at_region_boundaries() {
    for r in [2.0 - 1e-9, 2.0 + 1e-9, 40.0 - 1e-9, 40.0 + 1e-9] {
        for theta in [0.0, 0.7, -1.2, FRAC_PI_2] {
            let z = C::from_polar(r, theta);
            for nu in [0, 1] {
                let got = bessel_k(nu, z).unwrap();
                let want = k_oracle(nu as f64, z);
                assert!(rel(got, want) < 1e-8, "K{nu}({z}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn series_and_continued_fraction_join_smoothly() {
    for theta in [0.0, 0.5, 1.0, 1.5] {
        let lo = bessel_k01(C::from_polar(2.0, theta)).unwrap();
        let hi = bessel_k01(C::from_polar(2.0 + 1e-10, theta)).unwrap();
        assert!(rel(lo.0, hi.0) < 1e-9);
        assert!(rel(lo.1, hi.1) < 1e-9);
    }
}

#[test]
fn kelvin_pair_splits_real_argument() {
    for x in [0.3, 1.0, 4.5, 12.0] {
        let w = kelvin_k1(C::new(x, 0.0)).unwrap();
        let (ker, kei) = kelvin_pair(C::new(x, 0.0)).unwrap();
        assert!((ker - C::new(w.re, 0.0)).norm() < 1e-14 * w.norm());
        assert!((kei - C::new(w.im, 0.0)).norm() < 1e-14 * w.norm());
        let direct = k_oracle(1.0, C::from_polar(x, FRAC_PI_4)) * C::new(0.0, -1.0);
        assert!(rel(w, direct) < 1e-8);
    }
}

#[test]
fn domain_errors() {
    assert!(matches!(bessel_k(0, C::new(0.0, 0.0)), Err(SfwmError::Domain(_))));
    assert!(matches!(bessel_k(1, C::new(-1.0, 0.0)), Err(SfwmError::Domain(_))));
    assert!(matches!(bessel_k(2, C::new(1.0, 0.0)), Err(SfwmError::Domain(_))));
    assert!(matches!(bessel_k(0, C::new(f64::NAN, 1.0)), Err(SfwmError::Domain(_))));
    assert!(kelvin_k1(C::new(0.0, 0.0)).is_err());
}

#[test]
fn erf_values() {
    assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-14);
    assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-14);
    assert!((erf(-2.0) + 0.995_322_265_018_952_7).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_k_matches_integral(lr in (0.05f64).ln()..(60.0f64).ln(), theta in -3.1..3.1f64) {
        let z = C::from_polar(lr.exp(), theta);
        let (k0, k1) = bessel_k01(z).unwrap();
        prop_assert!(rel(k0, k_oracle(0.0, z)) < 1e-8, "K0({}) = {}", z, k0);
        prop_assert!(rel(k1, k_oracle(1.0, z)) < 1e-8, "K1({}) = {}", z, k1);
    }

    #[test]
    fn conjugate_symmetry(lr in (0.05f64).ln()..(60.0f64).ln(), theta in 0.0..3.1f64) {
        let z = C::from_polar(lr.exp(), theta);
        let (a0, a1) = bessel_k01(z).unwrap();
        let (b0, b1) = bessel_k01(z.conj()).unwrap();
        prop_assert!(rel(a0.conj(), b0) < 1e-12);
        prop_assert!(rel(a1.conj(), b1) < 1e-12);
    }

    #[test]
    fn wronskian_like_recurrence(lr in (0.1f64).ln()..(30.0f64).ln(), theta in -1.4..1.4f64) {
        // K₀′ = −K₁, checked by a central difference.
        let z = C::from_polar(lr.exp(), theta);
        let h = 1e-5 * z.norm();
        let dk0 = (bessel_k(0, z + h).unwrap() - bessel_k(0, z - h).unwrap()) / (2.0 * h);
        let k1 = bessel_k(1, z).unwrap();
        prop_assert!(rel(-dk0, k1) < 1e-6);
    }
}
