//! Complex special functions: modified Bessel K₀/K₁, Kelvin functions of the
//! second kind, and the error function.
//!
//! K_ν uses the ascending series for |z| ≤ 2, Steed's continued fraction for
//! 2 < |z| ≤ 40 and the Hankel asymptotic expansion beyond. Outside the
//! series disc the left half-plane is reached by reflection through I_ν.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Result, SfwmError};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 40.0;
const EPS: f64 = 1e-16;

fn check_argument(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SfwmError::Domain(format!("non-finite argument {z}")));
    }
    if z.norm() == 0.0 {
        return Err(SfwmError::Domain("K_nu(0) is singular".into()));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(SfwmError::Domain(format!("{z} lies on the branch cut")));
    }
    Ok(())
}

/// Modified Bessel function of the second kind K_ν(z), ν ∈ {0, 1}, principal branch.
pub fn bessel_k(order: u32, z: Complex64) -> Result<Complex64> {
    if order > 1 {
        return Err(SfwmError::Domain(format!("order {order} not supported")));
    }
    let (k0, k1) = bessel_k01(z)?;
    Ok(if order == 0 { k0 } else { k1 })
}

/// (K₀(z), K₁(z)).
pub fn bessel_k01(z: Complex64) -> Result<(Complex64, Complex64)> {
    check_argument(z)?;
    let r = z.norm();
    if r <= SERIES_RADIUS {
        Ok(series_k01(z))
    } else if z.re < 0.0 {
        reflected_k01(z)
    } else if r <= ASYMPTOTIC_RADIUS {
        steed_k01(z)
    } else {
        Ok((asymptotic_k(0, z), asymptotic_k(1, z)))
    }
}

fn series_k01(z: Complex64) -> (Complex64, Complex64) {
    let t = z * z * 0.25;
    let log_half = (z * 0.5).ln();
    // k-th terms: t^k/(k!)² and t^k/(k!(k+1)!)
    let mut a = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, 0.0);
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut i0 = Complex64::new(0.0, 0.0);
    let mut i1s = Complex64::new(0.0, 0.0);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    for k in 0..200 {
        let kf = k as f64;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += a;
        i1s += b;
        s0 += a * psi_k1;
        s1 += b * (psi_k1 + psi_k2);
        if a.norm() < EPS * i0.norm() && b.norm() < EPS * i1s.norm() && k > 2 {
            break;
        }
        a = a * t / ((kf + 1.0) * (kf + 1.0));
        b = b * t / ((kf + 1.0) * (kf + 2.0));
        psi_k1 = psi_k2;
    }
    let k0 = -log_half * i0 + s0;
    let i1 = z * 0.5 * i1s;
    let k1 = z.inv() + log_half * i1 - z * 0.25 * s1;
    (k0, k1)
}

fn steed_k01(x: Complex64) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + x) * 2.0;
    let mut d = b.inv();
    let mut delh = d;
    let mut h = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 2..20_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += qnew * c;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - one) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < EPS * s.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SfwmError::Convergence {
            what: format!("continued fraction for K(z) at z = {x}"),
            achieved: f64::NAN,
        });
    }
    h *= a1;
    let k0 = (Complex64::new(PI, 0.0) / (x * 2.0)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    Ok((k0, k1))
}

/// K_ν(∓w e^{±iπ}) = (−1)^ν K_ν(w) ∓ iπ I_ν(w) with w = −z, Re w > 0.
fn reflected_k01(z: Complex64) -> Result<(Complex64, Complex64)> {
    let w = -z;
    let (k0, k1) = bessel_k01(w)?;
    let (i0, i1) = bessel_i01(w, k0, k1)?;
    let s = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let ipi = Complex64::new(0.0, s * PI);
    Ok((k0 - ipi * i0, -k1 - ipi * i1))
}

/// I₀, I₁ from the Wronskian I₀K₁ + I₁K₀ = 1/w and the continued fraction
/// for I₁/I₀ (modified Lentz).
fn bessel_i01(w: Complex64, k0: Complex64, k1: Complex64) -> Result<(Complex64, Complex64)> {
    let tiny = Complex64::new(1e-150, 0.0);
    let inv = w.inv();
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    let mut converged = false;
    for k in 1..100_000 {
        let b = inv * (2.0 * k as f64);
        d = b + d;
        if d.norm() < 1e-150 {
            d = tiny;
        }
        c = b + c.inv();
        if c.norm() < 1e-150 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SfwmError::Convergence { what: format!("continued fraction for I1/I0 at {w}"), achieved: f64::NAN });
    }
    let ratio = f;
    let i0 = (w * (k1 + ratio * k0)).inv();
    Ok((i0, ratio * i0))
}

fn asymptotic_k(order: u32, z: Complex64) -> Complex64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        term = term * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf) / z;
        let tn = term.norm();
        if tn > last {
            break;
        }
        sum += term;
        last = tn;
        if tn < EPS * sum.norm() {
            break;
        }
    }
    (Complex64::new(PI, 0.0) / (z * 2.0)).sqrt() * (-z).exp() * sum
}

/// (Ker₁(x), Kei₁(x)) = (Re, Im) of e^{−iπ/2} K₁(e^{iπ/4} x), extended to complex x.
pub fn kelvin_pair(x: Complex64) -> Result<(Complex64, Complex64)> {
    let w = kelvin_k1(x)?;
    // For complex x the real/imaginary split is taken on the analytic pieces.
    let conj_branch = kelvin_k1_conj(x)?;
    let ker = (w + conj_branch) * 0.5;
    let kei = (w - conj_branch) * Complex64::new(0.0, -0.5);
    Ok((ker, kei))
}

/// e^{−iπ/2} K₁(e^{iπ/4} x).
pub fn kelvin_k1(x: Complex64) -> Result<Complex64> {
    if x.norm() == 0.0 {
        return Err(SfwmError::Domain("Kelvin functions are singular at 0".into()));
    }
    let rot = Complex64::from_polar(1.0, FRAC_PI_4);
    Ok(Complex64::from_polar(1.0, -FRAC_PI_2) * bessel_k(1, rot * x)?)
}

/// Analytic continuation of conj(e^{−iπ/2}K₁(e^{iπ/4}x̄)): equals the
/// complex conjugate of `kelvin_k1` on the real axis.
fn kelvin_k1_conj(x: Complex64) -> Result<Complex64> {
    Ok(kelvin_k1(x.conj())?.conj())
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}
