//! Independent quadrature oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;

pub fn simpson<F: Fn(f64) -> C>(f: F, a: f64, b: f64, n: usize) -> C {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + k as f64 * h) * w;
    }
    s * (h / 3.0)
}

/// K_ν(z) = √(π/2z)·e^{−z}/Γ(ν+½)·∫₀^∞ e^{−u}u^{ν−½}(1 + u/2z)^{ν−½} du,
/// valid for |arg z| < π, with u = s².
pub fn k_oracle(nu: f64, z: C) -> C {
    let gamma_half = if nu == 0.0 { PI.sqrt() } else { 0.5 * PI.sqrt() };
    let integral = simpson(
        |s| {
            let u = s * s;
            (C::new(1.0, 0.0) + u / (2.0 * z)).powf(nu - 0.5) * (2.0 * s.powf(2.0 * nu) * (-u).exp())
        },
        0.0,
        9.0,
        60_000,
    );
    (C::new(PI, 0.0) / (2.0 * z)).sqrt() * (-z).exp() * integral / gamma_half
}

/// ∫|1 − e^{−Γi}|² dω with the high-frequency form Γi ≈ u(ν − iω)/ω², written
/// in t = 1/ω.
pub fn pairing_integral(u: f64, nu: f64) -> f64 {
    let a = u * nu;
    let end = 12.0 / a.sqrt();
    let f = |t: f64| {
        if t == 0.0 {
            return C::new(u * u, 0.0);
        }
        let e = (-a * t * t).exp();
        C::new((1.0 - 2.0 * e * (u * t).cos() + e * e) / (t * t), 0.0)
    };
    2.0 * (simpson(f, 0.0, end, 400_000).re + 1.0 / end)
}

/// (π/2 − Si(x)) for large x from the auxiliary-function asymptotics.
fn si_tail(x: f64) -> f64 {
    let f = (1.0 - 2.0 / (x * x) + 24.0 / x.powi(4)) / x;
    let g = (1.0 - 6.0 / (x * x) + 120.0 / x.powi(4)) / (x * x);
    f * x.cos() + g * x.sin()
}

/// (1/2π)∫(1 − e^{i/ω})e^{iωτ} dω over the real line.
pub fn unit_wavefunction(tau: f64) -> C {
    let i = C::new(0.0, 1.0);
    let x_max = 2e4;
    let w_max = 2e4;
    // |ω| < 1: the constant integrates in closed form, the essential
    // singularity is unfolded by x = 1/ω.
    let inner = |x: f64| (i * (x + tau / x)).exp() / (x * x);
    let core = tau.sin() / (PI * tau)
        - (simpson(inner, 1.0, x_max, 4_000_000) + simpson(inner, -x_max, -1.0, 4_000_000)) / (2.0 * PI);
    let outer = |w: f64| (1.0 - (i / w).exp()) * (i * w * tau).exp();
    let mid = (simpson(outer, 1.0, w_max, 4_000_000) + simpson(outer, -w_max, -1.0, 4_000_000)) / (2.0 * PI);
    core + mid + si_tail(w_max * tau) / PI
}

pub type M2 = [C; 4];

fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Classical RK4 for Y′ = −K·Y, Y(0) = 1, over [0, length].
pub fn rk4(pc: &sfwm::coefficients::ParametricCoefficients, length: f64, steps: usize) -> M2 {
    let k: M2 = [pc.g_s, pc.kappa_s, pc.kappa_i, pc.gamma_i];
    let f = |y: &M2| -> M2 { mul(&k, y).map(|v| -v) };
    let add = |y: &M2, d: &M2, h: f64| -> M2 { [y[0] + d[0] * h, y[1] + d[1] * h, y[2] + d[2] * h, y[3] + d[3] * h] };
    let h = length / steps as f64;
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let mut y: M2 = [one, zero, zero, one];
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, 0.5 * h));
        let k3 = f(&add(&y, &k2, 0.5 * h));
        let k4 = f(&add(&y, &k3, h));
        for i in 0..4 {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}
