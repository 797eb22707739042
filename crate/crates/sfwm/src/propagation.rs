//! Frequency-domain transfer matrices, noise propagators and a direct ODE
//! integrator used as an oracle.
//!
//! The medium length is normalized to one; `z` runs over [0, 1].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{NoiseCoefficientSet, ParametricCoefficients};
use crate::error::{Result, SfwmError};

type C = Complex64;

fn one() -> C {
    C::new(1.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub a1: C,
    pub b1: C,
    pub c1: C,
    pub d1: C,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        let z = C::new(0.0, 0.0);
        TransferMatrix { a1: one(), b1: z, c1: z, d1: one() }
    }

    pub fn entries(&self) -> [C; 4] {
        [self.a1, self.b1, self.c1, self.d1]
    }

    pub fn compose(&self, first: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            a1: self.a1 * first.a1 + self.b1 * first.c1,
            b1: self.a1 * first.b1 + self.b1 * first.d1,
            c1: self.c1 * first.a1 + self.d1 * first.c1,
            d1: self.c1 * first.b1 + self.d1 * first.d1,
        }
    }

    pub fn max_abs_diff(&self, o: &TransferMatrix) -> f64 {
        self.entries()
            .iter()
            .zip(o.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Propagators from a source at `z` to the output face, with the composed
/// noise weights `p` (signal) and `q` (idler) indexed by {31, 32, 34}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePropagators {
    pub a2: C,
    pub b2: C,
    pub c2: C,
    pub d2: C,
    pub p: [C; 3],
    pub q: [C; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropagationModel {
    Gsa,
    Exact,
    Backward,
}

/// (e^x − 1)/x.
pub fn phi1(x: C) -> C {
    if x.norm() < 1e-2 {
        let mut term = one();
        let mut sum = one();
        for k in 2..12 {
            term = term * x / k as f64;
            sum += term;
        }
        sum
    } else {
        (x.exp() - 1.0) / x
    }
}

/// (e^x − 1 − x)/x².
pub fn phi2(x: C) -> C {
    if x.norm() < 1e-2 {
        let mut term = C::new(0.5, 0.0);
        let mut sum = term;
        for k in 3..13 {
            term = term * x / k as f64;
            sum += term;
        }
        sum
    } else {
        (x.exp() - 1.0 - x) / (x * x)
    }
}

/// sinh(x)/x.
fn sinhc(x: C) -> C {
    if x.norm() < 1e-2 {
        let x2 = x * x;
        let mut term = one();
        let mut sum = one();
        for k in 1..8 {
            term = term * x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        x.sinh() / x
    }
}

/// Forward GSA propagation over length `l`.
fn gsa_len(pc: &ParametricCoefficients, l: f64) -> TransferMatrix {
    let g = pc.gamma_i;
    // (κ/Γ)(e^{−Γl} − 1) = −κ·l·phi1(−Γl)
    let f = -l * phi1(-g * l);
    TransferMatrix { a1: one(), b1: pc.kappa_s * f, c1: pc.kappa_i * f, d1: (-g * l).exp() }
}

/// exp(−l·[[G, κs],[κi, Γ]]).
fn exact_len(pc: &ParametricCoefficients, l: f64) -> TransferMatrix {
    let (g, gam, ks, ki) = (pc.g_s, pc.gamma_i, pc.kappa_s, pc.kappa_i);
    let half_diff = (g - gam) * 0.5;
    let mut phi = (half_diff * half_diff + ks * ki).sqrt();
    if phi.re < 0.0 {
        phi = -phi;
    }
    let x = phi * l;
    let ch = x.cosh();
    let sc = l * sinhc(x); // sinh(Φl)/Φ
    let e = (-(g + gam) * 0.5 * l).exp();
    TransferMatrix {
        a1: e * (ch - half_diff * sc),
        b1: -e * ks * sc,
        c1: -e * ki * sc,
        d1: e * (ch + half_diff * sc),
    }
}

pub fn transfer_gsa(coeffs: &ParametricCoefficients) -> TransferMatrix {
    gsa_len(coeffs, 1.0)
}

pub fn transfer_exact(coeffs: &ParametricCoefficients) -> TransferMatrix {
    exact_len(coeffs, 1.0)
}

/// Backward geometry; the idler leaves at z = 0.
///
/// The signal self-term is first order in κ_sκ_i with the idler boundary at
/// z = L, A1 = 1 − κ_sκ_i·(e^Γ − 1 − Γ)/Γ², which stays bounded for any OD.
pub fn transfer_backward(coeffs: &ParametricCoefficients) -> TransferMatrix {
    let g = coeffs.gamma_i;
    let ks = coeffs.kappa_s;
    let ki = coeffs.kappa_i;
    let e = g.exp();
    TransferMatrix {
        a1: one() - ks * ki * phi2(g),
        b1: -ks * phi1(g),
        c1: ki * phi1(g),
        d1: e,
    }
}

pub fn transfer(model: PropagationModel, coeffs: &ParametricCoefficients) -> TransferMatrix {
    match model {
        PropagationModel::Gsa => transfer_gsa(coeffs),
        PropagationModel::Exact => transfer_exact(coeffs),
        PropagationModel::Backward => transfer_backward(coeffs),
    }
}

/// (a2, b2, c2, d2) for a source at `z`.
pub fn propagators(model: PropagationModel, coeffs: &ParametricCoefficients, z: f64) -> Result<[C; 4]> {
    if !(0.0..=1.0).contains(&z) {
        return Err(SfwmError::InvalidInput(format!("source position z = {z} outside [0, 1]")));
    }
    Ok(match model {
        PropagationModel::Gsa => gsa_len(coeffs, 1.0 - z).entries(),
        PropagationModel::Exact => exact_len(coeffs, 1.0 - z).entries(),
        PropagationModel::Backward => {
            let g = coeffs.gamma_i;
            let ks = coeffs.kappa_s;
            let ki = coeffs.kappa_i;
            let a2 = one() - ks * ki * (1.0 - z) * (1.0 - z) * phi2(g * (1.0 - z));
            let b2 = ks * z * phi1(g * z);
            let c2 = ki * (g * z).exp() * (1.0 - z) * phi1(g * (1.0 - z));
            let d2 = -(g * z).exp();
            [a2, b2, c2, d2]
        }
    })
}

pub fn noise_propagators(
    model: PropagationModel,
    coeffs: &ParametricCoefficients,
    noise: &NoiseCoefficientSet,
    z: f64,
) -> Result<NoisePropagators> {
    let [a2, b2, c2, d2] = propagators(model, coeffs, z)?;
    let mut p = [C::new(0.0, 0.0); 3];
    let mut q = p;
    for j in 0..3 {
        p[j] = a2 * noise.zeta_s[j] + b2 * noise.zeta_i[j];
        q[j] = c2 * noise.zeta_s[j] + d2 * noise.zeta_i[j];
    }
    Ok(NoisePropagators { a2, b2, c2, d2, p, q })
}

type Mat = [C; 4];

fn rhs(m: &Mat, y: &Mat) -> Mat {
    // −M·Y for row-major 2×2 matrices
    [
        -(m[0] * y[0] + m[1] * y[2]),
        -(m[0] * y[1] + m[1] * y[3]),
        -(m[2] * y[0] + m[3] * y[2]),
        -(m[2] * y[1] + m[3] * y[3]),
    ]
}

fn axpy(y: &Mat, h: f64, terms: &[(f64, &Mat)]) -> Mat {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Fundamental matrix of d/dz [a_s; a_i†] = −[[G_s, κ_s],[κ_i, Γ_i]]·[a_s; a_i†]
/// over [0, length], by adaptive Dormand–Prince 5(4) integration.
pub fn ode_reference(coeffs: &ParametricCoefficients, length: f64, tol: f64) -> Result<TransferMatrix> {
    let m: Mat = [coeffs.g_s, coeffs.kappa_s, coeffs.kappa_i, coeffs.gamma_i];
    let mut y: Mat = [one(), C::new(0.0, 0.0), C::new(0.0, 0.0), one()];
    let scale = m.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let mut h = (0.1 / scale).min(length);
    let mut z = 0.0;
    while z < length {
        if z + h > length {
            h = length - z;
        }
        if h < 1e-14 * length.max(1.0) {
            return Err(SfwmError::StepUnderflow { z });
        }
        let k1 = rhs(&m, &y);
        let k2 = rhs(&m, &axpy(&y, h, &[(1.0 / 5.0, &k1)]));
        let k3 = rhs(&m, &axpy(&y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]));
        let k4 = rhs(&m, &axpy(&y, h, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]));
        let k5 = rhs(
            &m,
            &axpy(
                &y,
                h,
                &[(19372.0 / 6561.0, &k1), (-25360.0 / 2187.0, &k2), (64448.0 / 6561.0, &k3), (-212.0 / 729.0, &k4)],
            ),
        );
        let k6 = rhs(
            &m,
            &axpy(
                &y,
                h,
                &[
                    (9017.0 / 3168.0, &k1),
                    (-355.0 / 33.0, &k2),
                    (46732.0 / 5247.0, &k3),
                    (49.0 / 176.0, &k4),
                    (-5103.0 / 18656.0, &k5),
                ],
            ),
        );
        let y5 = axpy(
            &y,
            h,
            &[
                (35.0 / 384.0, &k1),
                (500.0 / 1113.0, &k3),
                (125.0 / 192.0, &k4),
                (-2187.0 / 6784.0, &k5),
                (11.0 / 84.0, &k6),
            ],
        );
        let k7 = rhs(&m, &y5);
        let y4 = axpy(
            &y,
            h,
            &[
                (5179.0 / 57600.0, &k1),
                (7571.0 / 16695.0, &k3),
                (393.0 / 640.0, &k4),
                (-92097.0 / 339200.0, &k5),
                (187.0 / 2100.0, &k6),
                (1.0 / 40.0, &k7),
            ],
        );
        let err = (0..4)
            .map(|i| (y5[i] - y4[i]).norm() / (tol * (1.0 + y[i].norm().max(y5[i].norm()))))
            .fold(0.0, f64::max);
        if err <= 1.0 {
            z += h;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(TransferMatrix { a1: y[0], b1: y[1], c1: y[2], d1: y[3] })
}
