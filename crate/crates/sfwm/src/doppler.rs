//! Maxwell–Boltzmann velocity averaging for warm vapors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    coefficients, diffusion, doppler_detunings, CoefficientModel, DiffusionPair, DopplerShift, ParametricCoefficients,
};
use crate::correlations::{traces_model, CorrelationTrace};
use crate::error::{Result, SfwmError};
use crate::model::{DriveConfig, FrequencyGrid, Geometry, LevelScheme, PopulationModel, BOLTZMANN};
use crate::propagation::{transfer, TransferMatrix};
use crate::quad::{gauss_hermite_normalized, gauss_legendre};
use crate::spectra::{
    decompose_model, default_breakpoints, default_rate_scale, propagation_model, rates_model, Kernel,
    SpectralDecomposition, SpectralModel,
};
use crate::propagation::PropagationModel;
use crate::steady_state::{solve_steady, SteadyState};

type C = Complex64;

pub const DEFAULT_VELOCITY_NODES: usize = 128;
pub const PANEL_NODES: usize = 8;
pub const PANEL_FACTOR: f64 = 4.0;
const VELOCITY_RANGE: f64 = 6.5;
const WARM_RABI_GATE: f64 = 10.0;
/// Trace band in Doppler widths.
const TRACE_BAND: f64 = 48.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    /// Velocities in m/s.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub temperature: f64,
    pub mass: f64,
}

impl VelocityGrid {
    /// One-dimensional rms speed √(k_BT/M).
    pub fn rms_speed(&self) -> f64 {
        (BOLTZMANN * self.temperature / self.mass).sqrt()
    }

    pub fn single(v: f64, mass: f64) -> Self {
        VelocityGrid { nodes: vec![v], weights: vec![1.0], temperature: 0.0, mass }
    }
}

pub fn velocity_grid(temperature: f64, mass: f64, n_nodes: usize) -> Result<VelocityGrid> {
    check_thermal(temperature, mass)?;
    if n_nodes < 8 {
        return Err(SfwmError::InvalidInput(format!("need at least 8 velocity nodes, got {n_nodes}")));
    }
    let (x, weights) = gauss_hermite_normalized(n_nodes);
    let s = (2.0 * BOLTZMANN * temperature / mass).sqrt();
    Ok(VelocityGrid { nodes: x.iter().map(|x| s * x).collect(), weights, temperature, mass })
}

fn check_thermal(temperature: f64, mass: f64) -> Result<()> {
    if !(temperature > 0.0) {
        return Err(SfwmError::InvalidInput(format!("temperature must be > 0 K, got {temperature}")));
    }
    if !(mass > 0.0) {
        return Err(SfwmError::InvalidInput("mass must be > 0".into()));
    }
    Ok(())
}

/// Composite Gauss–Legendre Maxwellian grid graded toward the two-photon
/// resonance, with panels no wider than `factor` resonance widths.
///
/// The fixed resonance sits at v_c = −Δ2 Γ/k₂ with width (γ41/2)Γ/|k₂|; the
/// idler-shifted resonances move with ω and set the widest panel,
/// (γ31/2)Γ/k_i.
pub fn velocity_grid_resolved(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    temperature: f64,
    nodes_per_panel: usize,
    factor: f64,
) -> Result<VelocityGrid> {
    let mass = scheme.mass;
    check_thermal(temperature, mass)?;
    if nodes_per_panel < 2 || !(factor > 0.0) {
        return Err(SfwmError::InvalidInput("panel rule needs ≥ 2 nodes and a positive width factor".into()));
    }
    let g = scheme.gamma_unit;
    let dec = scheme.decoherence();
    let (kc, kd) = scheme.pump_wavenumbers();
    let k2 = match drive.geometry {
        Geometry::Forward => kc + kd,
        Geometry::Backward => kc - kd,
    }
    .abs();
    let wmove = 0.5 * dec.g31 * g / scheme.k_i() * factor;
    let wfix = if k2 > 0.0 { (0.5 * dec.g41 * g / k2 * factor).min(wmove) } else { wmove };
    let vc = if k2 > 0.0 { -drive.delta2 * g / k2 } else { 0.0 };
    let sigma = (BOLTZMANN * temperature / mass).sqrt();
    let vmax = VELOCITY_RANGE * sigma;

    let mut breaks = vec![vc];
    for sign in [-1.0, 1.0] {
        let mut v = vc;
        while sign * v < vmax {
            v += sign * wmove.min(wfix.max(0.5 * (v - vc).abs()));
            breaks.push(v);
        }
    }
    breaks.retain(|b| b.abs() < vmax);
    breaks.extend([-vmax, vmax]);
    breaks.sort_by(|a, b| a.total_cmp(b));
    // No panel wider than the thermal width.
    let mut panels = Vec::with_capacity(breaks.len());
    for p in breaks.windows(2) {
        let m = ((p[1] - p[0]) / sigma).ceil().max(1.0) as usize;
        let h = (p[1] - p[0]) / m as f64;
        panels.extend((0..m).map(|k| (p[0] + k as f64 * h, p[0] + (k + 1) as f64 * h)));
    }

    let (x, w) = gauss_legendre(nodes_per_panel);
    let mut nodes = Vec::with_capacity(panels.len() * nodes_per_panel);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (a, b) in panels {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (xj, wj) in x.iter().zip(&w) {
            let v = mid + half * xj;
            nodes.push(v);
            weights.push(half * wj * (-0.5 * (v / sigma).powi(2)).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(VelocityGrid { nodes, weights, temperature, mass })
}

/// Default warm grid: the graded composite rule.
pub fn default_velocity_grid(scheme: &LevelScheme, drive: &DriveConfig, temperature: f64) -> Result<VelocityGrid> {
    velocity_grid_resolved(scheme, drive, temperature, PANEL_NODES, PANEL_FACTOR)
}

/// Warm ensemble: one velocity class per node, each with its own detunings,
/// steady state and diffusion matrices.
#[derive(Debug, Clone)]
pub struct WarmSource {
    pub scheme: LevelScheme,
    pub drive: DriveConfig,
    pub vgrid: VelocityGrid,
    shifts: Vec<DopplerShift>,
    steadies: Vec<SteadyState>,
    diffusions: Vec<DiffusionPair>,
}

impl WarmSource {
    pub fn new(scheme: &LevelScheme, drive: &DriveConfig, vgrid: &VelocityGrid) -> Result<Self> {
        scheme.validate()?;
        for w in drive.validate()? {
            log::warn!("{w}");
        }
        if drive.omega_c.norm() > WARM_RABI_GATE && drive.omega_d.norm() > WARM_RABI_GATE {
            log::warn!("both Rabi frequencies exceed {WARM_RABI_GATE} Γ; the ground-state approximation is unreliable");
        }
        let shifts: Vec<DopplerShift> = vgrid.nodes.iter().map(|&v| doppler_detunings(drive, scheme, v)).collect();
        let steadies: Vec<SteadyState> = shifts
            .par_iter()
            .map(|s| solve_steady(scheme, drive, Some(s)))
            .collect::<Result<_>>()?;
        let diffusions = steadies.iter().map(|s| diffusion(scheme, s)).collect::<Result<_>>()?;
        Ok(WarmSource { scheme: scheme.clone(), drive: drive.clone(), vgrid: vgrid.clone(), shifts, steadies, diffusions })
    }

    pub fn shifts(&self) -> &[DopplerShift] {
        &self.shifts
    }

    /// Velocity-averaged parametric coefficients at ω.
    pub fn averaged_coefficients(&self, omega: f64) -> Result<ParametricCoefficients> {
        Ok(self.kernel(omega)?.pc)
    }

    /// Width of the idler Doppler profile in Γ units.
    pub fn doppler_width(&self) -> f64 {
        self.scheme.k_i() * self.vgrid.rms_speed() / self.scheme.gamma_unit
    }
}

impl SpectralModel for WarmSource {
    fn kernel(&self, omega: f64) -> Result<Kernel> {
        let z = C::new(0.0, 0.0);
        let mut pc = ParametricCoefficients::zero();
        let mut xs = [[z; 2]; 2];
        let mut xi = xs;
        for m in 0..self.shifts.len() {
            let model = match self.drive.population_model {
                PopulationModel::Gsa => CoefficientModel::Gsa,
                PopulationModel::Exact => CoefficientModel::Exact(&self.steadies[m]),
            };
            let (p, noise) = coefficients(&self.scheme, &self.drive, &self.shifts[m], model, omega)?;
            let k = Kernel::from_noise(p, &noise, &self.diffusions[m]);
            let w = self.vgrid.weights[m];
            pc = pc.add(&p.scale(w));
            for a in 0..2 {
                for b in 0..2 {
                    xs[a][b] += k.xs[a][b] * w;
                    xi[a][b] += k.xi[a][b] * w;
                }
            }
        }
        Ok(Kernel { pc, xs, xi })
    }

    fn propagation(&self) -> PropagationModel {
        propagation_model(&self.drive)
    }

    fn gamma_unit(&self) -> f64 {
        self.scheme.gamma_unit
    }

    fn rate_scale(&self) -> f64 {
        default_rate_scale(&self.scheme, &self.drive).max(self.doppler_width())
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = default_breakpoints(&self.drive);
        let w = self.doppler_width();
        b.extend([-3.0 * w, -w, w, 3.0 * w]);
        b
    }

    fn pairing_from_idler(&self) -> bool {
        true
    }

    fn trace_band(&self) -> Option<f64> {
        Some(self.rate_scale().max(TRACE_BAND * self.doppler_width()).max(50.0))
    }
}

/// Transfer matrix built from velocity-averaged coefficients.
pub fn averaged_transfer(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    vgrid: &VelocityGrid,
    omega: f64,
) -> Result<TransferMatrix> {
    let src = WarmSource::new(scheme, drive, vgrid)?;
    Ok(transfer(src.propagation(), &src.averaged_coefficients(omega)?))
}

pub fn warm_decompose(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    vgrid: &VelocityGrid,
    grid: &FrequencyGrid,
) -> Result<SpectralDecomposition> {
    decompose_model(&WarmSource::new(scheme, drive, vgrid)?, grid)
}

/// Frequency grid for warm correlation traces: resolves both the collective
/// and the Doppler time scales.
pub fn warm_correlation_grid(src: &WarmSource) -> FrequencyGrid {
    let base = FrequencyGrid::for_correlation(src.drive.od);
    let w = base.half_width.max(100.0 * src.doppler_width());
    let n = ((2.0 * w / 0.05).ceil() as usize).next_power_of_two().clamp(1 << 12, 1 << 21);
    FrequencyGrid::new(n, w).expect("valid warm grid")
}

pub fn warm_correlation(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    vgrid: &VelocityGrid,
    grid: &FrequencyGrid,
) -> Result<CorrelationTrace> {
    let src = WarmSource::new(scheme, drive, vgrid)?;
    let rates = rates_model(&src)?;
    Ok(traces_model(&src, grid, &rates)?.0)
}

/// Least-squares fit of τ_d = τ₀/(1 + x·OD) in the decay times themselves.
/// τ₀ is eliminated in closed form; x is found by a log-spaced scan refined
/// with golden-section search. Returns (τ₀, x).
pub fn fit_scaling(od: &[f64], tau: &[f64]) -> Result<(f64, f64)> {
    if od.len() != tau.len() || od.len() < 2 {
        return Err(SfwmError::InvalidInput("scaling fit needs at least two (OD, τ) pairs".into()));
    }
    if od.iter().chain(tau).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(SfwmError::InvalidInput("scaling fit needs positive OD and τ values".into()));
    }
    let best_tau0 = |x: f64| {
        let f: Vec<f64> = od.iter().map(|o| 1.0 / (1.0 + x * o)).collect();
        let num: f64 = f.iter().zip(tau).map(|(f, t)| f * t).sum();
        let den: f64 = f.iter().map(|f| f * f).sum();
        num / den
    };
    let cost = |lx: f64| {
        let x = lx.exp();
        let t0 = best_tau0(x);
        od.iter().zip(tau).map(|(o, t)| (t - t0 / (1.0 + x * o)).powi(2)).sum::<f64>()
    };
    let (lo, hi, steps) = (1e-7f64.ln(), 10f64.ln(), 400);
    let h = (hi - lo) / steps as f64;
    let k = (0..=steps).min_by(|&a, &b| cost(lo + a as f64 * h).total_cmp(&cost(lo + b as f64 * h))).unwrap();
    if k == 0 || k == steps {
        return Err(SfwmError::InsufficientRange("scaling parameter at the edge of the search range".into()));
    }
    let (mut a, mut b) = (lo + (k - 1) as f64 * h, lo + (k + 1) as f64 * h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-12 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = (0.5 * (a + b)).exp();
    Ok((best_tau0(x), x))
}
