//! Frequency-domain coefficients of the coupled propagation equations:
//! parametric terms, Langevin-noise weights and diffusion matrices.
//!
//! Noise vectors are ordered by transition {31, 32, 34}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SfwmError};
use crate::model::{DriveConfig, Geometry, LevelScheme};
use crate::steady_state::{solve_steady, SteadyState};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricCoefficients {
    pub gamma_i: Complex64,
    pub kappa_s: Complex64,
    pub kappa_i: Complex64,
    pub g_s: Complex64,
}

impl ParametricCoefficients {
    pub fn zero() -> Self {
        let z = c(0.0);
        ParametricCoefficients { gamma_i: z, kappa_s: z, kappa_i: z, g_s: z }
    }

    pub fn scale(&self, f: f64) -> Self {
        ParametricCoefficients {
            gamma_i: self.gamma_i * f,
            kappa_s: self.kappa_s * f,
            kappa_i: self.kappa_i * f,
            g_s: self.g_s * f,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ParametricCoefficients {
            gamma_i: self.gamma_i + o.gamma_i,
            kappa_s: self.kappa_s + o.kappa_s,
            kappa_i: self.kappa_i + o.kappa_i,
            g_s: self.g_s + o.g_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCoefficientSet {
    pub zeta_s: [Complex64; 3],
    pub zeta_i: [Complex64; 3],
}

/// Normal-ordered (`d_kj_jk`, rows {13,23,43}, cols {31,32,34}) and
/// anti-normal-ordered (`d_jk_kj`, rows {31,32,34}, cols {13,23,43}) diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionPair {
    pub d_kj_jk: [[Complex64; 3]; 3],
    pub d_jk_kj: [[Complex64; 3]; 3],
}

/// Doppler-shifted detunings (Δ′1, Δ′2, Δ′3) in Γ units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerShift {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

impl DopplerShift {
    pub fn rest(drive: &DriveConfig) -> Self {
        DopplerShift { delta1: drive.delta1, delta2: drive.delta2, delta3: 0.0 }
    }
}

/// Which population model feeds the coefficients.
#[derive(Debug, Clone, Copy)]
pub enum CoefficientModel<'a> {
    Gsa,
    Exact(&'a SteadyState),
}

fn free_terms(scheme: &LevelScheme, drive: &DriveConfig, omega: f64) -> (Complex64, Complex64) {
    let phi = drive.free_phase(omega, scheme.gamma_unit);
    (-I * phi, I * drive.dk_l)
}

fn gsa_forward(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    shift: &DopplerShift,
    omega: f64,
) -> Result<(ParametricCoefficients, NoiseCoefficientSet)> {
    if shift.delta1 == 0.0 {
        return Err(SfwmError::Domain("one-photon detuning is zero".into()));
    }
    let d = scheme.decoherence();
    let alpha = drive.od;
    let c43 = scheme.coupling43();
    let c31 = scheme.coupling31();
    let sl = scheme.s_lambda;
    let (oc, od) = (drive.omega_c, drive.omega_d);
    let (d1, d2) = (shift.delta1, shift.delta2);
    let we = omega + shift.delta3;
    let d31 = c(d.g31) - 2.0 * I * we;
    let d34 = c(d.g43) - 2.0 * I * (d2 + we);
    let g41m = c(d.g41) - 2.0 * I * d2;
    let g41p = c(d.g41) + 2.0 * I * d2;
    let (phase, mismatch) = free_terms(scheme, drive, omega);
    let root = (sl * c43 * c31).sqrt();
    let gamma_i = c(alpha * c31) / (2.0 * d31) + phase + mismatch;
    let kappa_s = I * alpha * root * oc * od / (4.0 * d1 * g41m * d31);
    let kappa_i = I * alpha * root * oc.conj() * od.conj() / (4.0 * d1 * g41p * d31);
    let g_s = -c(alpha * sl * c43 * oc.norm_sqr() * od.norm_sqr()) / (8.0 * d1 * d1 * g41p * d31 * d34) + phase;
    let a_s = (alpha * sl * c43).sqrt();
    let a_i = (alpha * c31).sqrt();
    let zeta_s = [
        a_s * oc * od / (2.0 * d1 * d31 * d34),
        a_s * (-I * od) / (2.0 * d1 * d34),
        a_s * I / d34,
    ];
    let zeta_i = [
        a_i * (-I) / d31,
        a_i * I * oc.conj() / (2.0 * d1 * d31),
        -a_i * oc.conj() * od.conj() / (2.0 * d1 * d31 * d34),
    ];
    Ok((
        ParametricCoefficients { gamma_i, kappa_s, kappa_i, g_s },
        NoiseCoefficientSet { zeta_s, zeta_i },
    ))
}

fn exact_forward(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    st: &SteadyState,
    shift: &DopplerShift,
    omega: f64,
) -> Result<(ParametricCoefficients, NoiseCoefficientSet)> {
    let d = scheme.decoherence();
    let alpha = drive.od;
    let c43 = scheme.coupling43();
    let c31 = scheme.coupling31();
    let sl = scheme.s_lambda;
    let (oc, od) = (drive.omega_c, drive.omega_d);
    let (d1, d2) = (shift.delta1, shift.delta2);
    let w = omega + shift.delta3;
    let oc2 = oc.norm_sqr();
    let od2 = od.norm_sqr();
    let d31 = c(d.g31) - 2.0 * I * w;
    let d32 = c(d.g32) - 2.0 * I * d1 - 2.0 * I * w;
    let d34 = c(d.g43) - 2.0 * I * d2 - 2.0 * I * w;
    let m = d34 * (d32 * d31 + oc2) + d31 * od2;
    if m.norm() == 0.0 {
        return Err(SfwmError::Pole { omega });
    }
    let s = |j, k| st.s(j, k);
    let (phase, mismatch) = free_terms(scheme, drive, omega);
    let pa = c(alpha * c31) / (2.0 * m);
    let pb = c(alpha * (sl * c43 * c31).sqrt()) / (2.0 * m);
    let pc = c(alpha * sl * c43) / (2.0 * m);
    let gamma_i = pa
        * (s(1, 2) * oc.conj() * (I * d.g43 + 2.0 * (d2 + w)) - s(1, 4) * oc.conj() * od.conj()
            + (s(1, 1) - s(3, 3)) * (d32 * d34 + od2))
        + phase
        + mismatch;
    let kappa_s = -pb
        * (s(1, 4) * d32 * d31 + s(1, 4) * oc2 + s(1, 2) * od * (I * d.g31 + 2.0 * w)
            + (s(3, 3) - s(1, 1)) * oc * od);
    let kappa_i = pb
        * ((s(4, 1) * (-I * d.g32 - 2.0 * d1 - 2.0 * w) + s(4, 2) * oc.conj()) * (I * d.g43 + 2.0 * d2 + 2.0 * w)
            + (s(3, 3) - s(4, 4)) * oc.conj() * od.conj()
            + s(4, 1) * od2);
    let g_s = pc
        * ((s(3, 3) - s(4, 4)) * (d32 * d31 + oc2) + s(4, 2) * (-2.0 * w - I * d.g31) * od + s(4, 1) * oc * od)
        + phase;
    let r = c((alpha * sl * c43).sqrt()) / m;
    let q = c((alpha * c31).sqrt()) / m;
    let zeta_s = [-I * r * oc * od, -r * d31 * od, I * r * (d32 * d31 + oc2)];
    let zeta_i = [-I * q * (d32 * d34 + od2), q * d34 * oc.conj(), I * q * oc.conj() * od.conj()];
    Ok((
        ParametricCoefficients { gamma_i, kappa_s, kappa_i, g_s },
        NoiseCoefficientSet { zeta_s, zeta_i },
    ))
}

/// Backward geometry: idler-side set flips sign; free phase and mismatch keep theirs.
fn to_backward(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    omega: f64,
    (p, n): (ParametricCoefficients, NoiseCoefficientSet),
) -> (ParametricCoefficients, NoiseCoefficientSet) {
    let (phase, mismatch) = free_terms(scheme, drive, omega);
    let atomic = p.gamma_i - phase - mismatch;
    (
        ParametricCoefficients {
            gamma_i: -atomic + phase + mismatch,
            kappa_s: p.kappa_s,
            kappa_i: -p.kappa_i,
            g_s: p.g_s,
        },
        NoiseCoefficientSet { zeta_s: n.zeta_s, zeta_i: [-n.zeta_i[0], -n.zeta_i[1], -n.zeta_i[2]] },
    )
}

/// General entry point: geometry from `drive`, detunings from `shift`.
pub fn coefficients(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    shift: &DopplerShift,
    model: CoefficientModel<'_>,
    omega: f64,
) -> Result<(ParametricCoefficients, NoiseCoefficientSet)> {
    let fwd = match model {
        CoefficientModel::Gsa => gsa_forward(scheme, drive, shift, omega)?,
        CoefficientModel::Exact(st) => exact_forward(scheme, drive, st, shift, omega)?,
    };
    Ok(match drive.geometry {
        Geometry::Forward => fwd,
        Geometry::Backward => to_backward(scheme, drive, omega, fwd),
    })
}

pub fn gsa_parametric(scheme: &LevelScheme, drive: &DriveConfig, omega: f64) -> Result<ParametricCoefficients> {
    let fwd = DriveConfig { geometry: Geometry::Forward, ..drive.clone() };
    Ok(gsa_forward(scheme, &fwd, &DopplerShift::rest(drive), omega)?.0)
}

pub fn gsa_noise(scheme: &LevelScheme, drive: &DriveConfig, omega: f64) -> Result<NoiseCoefficientSet> {
    Ok(gsa_forward(scheme, drive, &DopplerShift::rest(drive), omega)?.1)
}

pub fn exact_parametric(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    steady: &SteadyState,
    omega: f64,
) -> Result<(ParametricCoefficients, NoiseCoefficientSet)> {
    exact_forward(scheme, drive, steady, &DopplerShift::rest(drive), omega)
}

pub fn backward_parametric(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    omega: f64,
) -> Result<(ParametricCoefficients, NoiseCoefficientSet)> {
    let fwd = gsa_forward(scheme, drive, &DopplerShift::rest(drive), omega)?;
    Ok(to_backward(scheme, drive, omega, fwd))
}

/// Velocity-shifted detunings; forward uses (k_c + k_d)v, backward (k_c − k_d)v.
/// The idler shift is Δ′3 = −k_i v, so that Δ′2 + Δ′3 carries the signal
/// Doppler shift (k_s v) and Δ′1 + Δ′3 the Raman shift (k_c − k_i)v.
pub fn doppler_detunings(drive: &DriveConfig, scheme: &LevelScheme, v: f64) -> DopplerShift {
    let (kc, kd) = scheme.pump_wavenumbers();
    let ki = scheme.k_i();
    let g = scheme.gamma_unit;
    let k2 = match drive.geometry {
        Geometry::Forward => kc + kd,
        Geometry::Backward => kc - kd,
    };
    DopplerShift {
        delta1: drive.delta1 + kc * v / g,
        delta2: drive.delta2 + k2 * v / g,
        delta3: -ki * v / g,
    }
}

/// Coefficients for a single velocity class.
pub fn doppler_parametric(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    v: f64,
    omega: f64,
) -> Result<(ParametricCoefficients, NoiseCoefficientSet)> {
    let shift = doppler_detunings(drive, scheme, v);
    match drive.population_model {
        crate::model::PopulationModel::Gsa => coefficients(scheme, drive, &shift, CoefficientModel::Gsa, omega),
        crate::model::PopulationModel::Exact => {
            let st = solve_steady(scheme, drive, Some(&shift))?;
            coefficients(scheme, drive, &shift, CoefficientModel::Exact(&st), omega)
        }
    }
}

/// Diffusion matrices from the exact steady state.
pub fn diffusion(scheme: &LevelScheme, steady: &SteadyState) -> Result<DiffusionPair> {
    if steady.hermiticity_error() > 1e-9 {
        return Err(SfwmError::InvalidInput("steady state is not Hermitian".into()));
    }
    let d = scheme.decoherence();
    let (g21, g31, g42, g43) = (scheme.gamma21, scheme.gamma31, scheme.gamma42, scheme.gamma43);
    let p = |j| steady.pop(j);
    let z = c(0.0);
    let mut dn = [[z; 3]; 3];
    dn[0][0] = c(d.g31 * p(1) + g21 * p(2) + g31 * p(3));
    dn[1][1] = c((d.g32 - g21) * p(2) + g42 * p(4));
    dn[2][2] = c((d.g43 - g42 - g43) * p(4));
    dn[1][0] = 0.5 * (d.g31 + d.g32 - d.g21) * steady.s(2, 1);
    dn[0][1] = dn[1][0].conj();
    dn[2][0] = 0.5 * (d.g31 + d.g43 - d.g41) * steady.s(4, 1);
    dn[0][2] = dn[2][0].conj();
    dn[2][1] = 0.5 * (d.g32 + d.g43 - d.g42) * steady.s(4, 2);
    dn[1][2] = dn[2][1].conj();
    let mut da = [[z; 3]; 3];
    da[0][0] = c(g43 * p(4) + (d.g31 - g31) * p(3));
    da[1][1] = c(g43 * p(4) + (d.g32 - g31) * p(3));
    da[2][2] = c(g43 * p(4) + (d.g43 - g31) * p(3));
    Ok(DiffusionPair { d_kj_jk: dn, d_jk_kj: da })
}

/// Σ_jk x_j M_jk y_k.
pub fn bilinear(x: &[Complex64; 3], m: &[[Complex64; 3]; 3], y: &[Complex64; 3]) -> Complex64 {
    let mut s = c(0.0);
    for j in 0..3 {
        for k in 0..3 {
            s += x[j] * m[j][k] * y[k];
        }
    }
    s
}

pub fn conj3(x: &[Complex64; 3]) -> [Complex64; 3] {
    [x[0].conj(), x[1].conj(), x[2].conj()]
}
