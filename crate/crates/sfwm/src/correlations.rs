//! Time-domain biphoton observables.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SfwmError};
use crate::model::{time_to_ns, DriveConfig, FrequencyGrid, LevelScheme};
use crate::specfun::kelvin_pair;
use crate::spectra::{rates_model, spectral_point, Rates, Source, SpectralModel, SpectralPoint};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Least-squares decay time of |Ψ|² (1/Γ units).
    pub tau_d: f64,
    /// Direct 1/e crossing (1/Γ units).
    pub tau_1e: f64,
    pub window: (f64, f64),
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    /// Delays in 1/Γ.
    pub tau: Vec<f64>,
    pub psi: Vec<C>,
    /// R_s·R_i in Γ² units.
    pub background: f64,
    pub g2si: Vec<f64>,
    /// (R_sR_i + |Ψ|²)/R_s in Γ units.
    pub coincidence: Vec<f64>,
    pub decay: Option<DecayFit>,
    pub gamma_unit: f64,
}

impl CorrelationTrace {
    pub fn tau_ns(&self) -> Vec<f64> {
        self.tau.iter().map(|t| time_to_ns(*t, self.gamma_unit)).collect()
    }

    pub fn decay_ns(&self) -> Option<f64> {
        self.decay.as_ref().map(|d| time_to_ns(d.tau_d, self.gamma_unit))
    }

    pub fn peak_g2(&self) -> f64 {
        self.g2si.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same trace on the delay axis τ → −τ.
    pub fn reflected(&self) -> CorrelationTrace {
        CorrelationTrace {
            tau: self.tau.iter().rev().map(|t| -t).collect(),
            psi: self.psi.iter().rev().cloned().collect(),
            g2si: self.g2si.iter().rev().cloned().collect(),
            coincidence: self.coincidence.iter().rev().cloned().collect(),
            ..self.clone()
        }
    }

    /// Restrict to |τ| ≤ limit.
    pub fn cropped(&self, limit: f64) -> CorrelationTrace {
        let keep: Vec<usize> = (0..self.tau.len()).filter(|&i| self.tau[i].abs() <= limit).collect();
        CorrelationTrace {
            tau: keep.iter().map(|&i| self.tau[i]).collect(),
            psi: keep.iter().map(|&i| self.psi[i]).collect(),
            g2si: keep.iter().map(|&i| self.g2si[i]).collect(),
            coincidence: keep.iter().map(|&i| self.coincidence[i]).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonclassicalityMetrics {
    pub g2si_peak: f64,
    pub g2ss: f64,
    pub g2ii: f64,
    pub r_sb: f64,
    pub f_csi: f64,
    pub a_s: f64,
    pub a_i: f64,
}

/// Ψ(τ) = ∫dω/2π e^{iωτ} f(ω) for f sampled on a staggered grid; τ spans
/// [−π/δω, π/δω) in steps 2π/(Nδω).
pub fn transform(grid: &FrequencyGrid, f: &[C]) -> (Vec<f64>, Vec<C>) {
    let n = grid.n;
    let dw = grid.step();
    let mut buf = f.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    let w0 = -grid.half_width + 0.5 * dw;
    let dt = 2.0 * PI / (n as f64 * dw);
    let half = (n / 2) as i64;
    let mut tau = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for m in -half..half {
        let t = m as f64 * dt;
        let k = m.rem_euclid(n as i64) as usize;
        tau.push(t);
        psi.push(C::from_polar(dw / (2.0 * PI), w0 * t) * buf[k]);
    }
    (tau, psi)
}

fn sample<M: SpectralModel + ?Sized>(m: &M, grid: &FrequencyGrid) -> Result<Vec<SpectralPoint>> {
    let band = m.trace_band().unwrap_or(f64::INFINITY);
    grid.samples
        .par_iter()
        .map(|&w| if w.abs() <= band { spectral_point(m, w) } else { Ok(SpectralPoint::empty()) })
        .collect()
}

fn build_trace(tau: Vec<f64>, psi: Vec<C>, rs: f64, ri: f64, gamma_unit: f64) -> CorrelationTrace {
    let bg = rs * ri;
    let g2si = psi.iter().map(|p| 1.0 + p.norm_sqr() / bg).collect();
    let coincidence = psi.iter().map(|p| (bg + p.norm_sqr()) / rs).collect();
    let mut t = CorrelationTrace { tau, psi, background: bg, g2si, coincidence, decay: None, gamma_unit };
    t.decay = decay_time(&t).ok();
    t
}

fn gamma_rates(r: &Rates, gamma_unit: f64) -> (f64, f64) {
    (r.r_s / gamma_unit, r.r_i / gamma_unit)
}

/// Signal–idler and idler–signal traces for any spectral model.
pub fn traces_model<M: SpectralModel + ?Sized>(
    m: &M,
    grid: &FrequencyGrid,
    rates: &Rates,
) -> Result<(CorrelationTrace, CorrelationTrace, Vec<SpectralPoint>)> {
    let pts = sample(m, grid)?;
    let (rs, ri) = gamma_rates(rates, m.gamma_unit());
    if !(rs > 0.0) || !(ri > 0.0) {
        return Err(SfwmError::InvalidInput("correlation traces need positive rates".into()));
    }
    let fsi: Vec<C> = pts.iter().map(|p| p.psi_si).collect();
    let fis: Vec<C> = pts.iter().map(|p| p.psi_is).collect();
    let (tau, psi) = transform(grid, &fsi);
    let (tau2, psi2) = transform(grid, &fis);
    let si = build_trace(tau, psi, rs, ri, m.gamma_unit());
    // Idler-side trace on the reflected delay axis (idler detection first).
    let tau2: Vec<f64> = tau2.iter().rev().map(|t| -t).collect();
    let psi2: Vec<C> = psi2.into_iter().rev().collect();
    let mut is = build_trace(tau2, psi2, rs, ri, m.gamma_unit());
    is.coincidence = is.psi.iter().map(|p| (is.background + p.norm_sqr()) / ri).collect();
    is.decay = decay_time(&is.reflected()).ok();
    Ok((si, is, pts))
}

/// Signal–idler correlation trace for the cold source.
pub fn wavefunction(scheme: &LevelScheme, drive: &DriveConfig, grid: &FrequencyGrid) -> Result<CorrelationTrace> {
    let src = Source::new(scheme, drive)?;
    let rates = rates_model(&src)?;
    Ok(traces_model(&src, grid, &rates)?.0)
}

/// Large-OD closed form Ψ(τ) in terms of Kelvin functions of order one.
pub fn analytic_wavefunction(scheme: &LevelScheme, drive: &DriveConfig, tau: &[f64]) -> Result<Vec<C>> {
    if drive.delta1 == 0.0 {
        return Err(SfwmError::Domain("analytic wavefunction requires delta1 != 0".into()));
    }
    if drive.od < 10.0 {
        log::warn!("analytic wavefunction is a large-OD result; OD = {} < 10", drive.od);
    }
    let d = scheme.decoherence();
    let u = drive.od * scheme.coupling31() / 4.0;
    let ratio = C::new(0.0, 1.0) * (scheme.s_lambda * scheme.coupling43() / scheme.coupling31()).sqrt()
        * drive.omega_c
        * drive.omega_d
        / (2.0 * drive.delta1 * C::new(d.g41, -2.0 * drive.delta2));
    let delta = tau
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|x| *x > 0.0)
        .fold(f64::INFINITY, f64::min);
    let delta = if delta.is_finite() { delta } else { 1e-6 };
    tau.iter()
        .map(|&t| {
            let t = if t == 0.0 { delta } else { t };
            let a = t.abs();
            let theta = C::new(0.0, 4.0 * u * a);
            let (ra, ia) = kelvin_pair(theta.sqrt())?;
            let (rb, ib) = kelvin_pair((-theta).sqrt())?;
            let i = C::new(0.0, 1.0);
            let pre = (i * u / (2.0 * PI * PI * a.powi(3))).sqrt();
            let bracket = (-i * t + a) * ia + (t - i * a) * ib + (-i * t - a) * ra + (t + i * a) * rb;
            Ok(pre * ratio * bracket)
        })
        .collect()
}

/// Exponential fit of the correlated part |Ψ|² from its peak to the e⁻² point.
pub fn decay_time(trace: &CorrelationTrace) -> Result<DecayFit> {
    let y: Vec<f64> = trace.psi.iter().map(|p| p.norm_sqr()).collect();
    fit_decay(&trace.tau, &y)
}

pub fn fit_decay(tau: &[f64], y: &[f64]) -> Result<DecayFit> {
    let (k, &y0) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or_else(|| SfwmError::InsufficientRange("empty trace".into()))?;
    if !(y0 > 0.0) {
        return Err(SfwmError::InsufficientRange("no correlated peak".into()));
    }
    let stop = (k..y.len())
        .find(|&j| y[j] < y0 * (-2f64).exp())
        .ok_or_else(|| SfwmError::InsufficientRange("trace never falls to e^-2 of its peak".into()))?;
    let n = stop - k;
    if n < 3 {
        return Err(SfwmError::InsufficientRange(format!("only {n} samples between peak and e^-2 point")));
    }
    let xs = &tau[k..stop];
    let ls: Vec<f64> = y[k..stop].iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ls.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, l)| (x - mx) * (l - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(SfwmError::InsufficientRange("trace does not decay".into()));
    }
    let icpt = my - slope * mx;
    let residual = (xs.iter().zip(&ls).map(|(x, l)| (l - icpt - slope * x).powi(2)).sum::<f64>() / nf).sqrt();
    let target = y0 * (-1f64).exp();
    let j = (k..y.len()).find(|&j| y[j] < target).unwrap_or(stop);
    let tau_1e = if j > k {
        let (l0, l1) = (y[j - 1].ln(), y[j].ln());
        let f = (l0 - target.ln()) / (l0 - l1);
        tau[j - 1] + f * (tau[j] - tau[j - 1]) - tau[k]
    } else {
        0.0
    };
    Ok(DecayFit { tau_d: -1.0 / slope, tau_1e, window: (tau[k], tau[stop - 1]), residual, points: n })
}

/// Number of secondary lobes of |Ψ|² after the main peak within `span`: local
/// maxima above `threshold` times the peak that are separated from the
/// previous lobe by a dip below half their height.
pub fn ringing_count(trace: &CorrelationTrace, threshold: f64, span: f64) -> usize {
    let y: Vec<f64> = trace.psi.iter().map(|p| p.norm_sqr()).collect();
    let Some((k, &y0)) = y.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()) else {
        return 0;
    };
    let t0 = trace.tau[k];
    let mut count = 0;
    let mut dip = f64::INFINITY;
    for j in k + 1..y.len().saturating_sub(1) {
        if trace.tau[j] - t0 > span {
            break;
        }
        dip = dip.min(y[j]);
        if y[j] > y[j - 1] && y[j] >= y[j + 1] && y[j] > threshold * y0 && dip < 0.5 * y[j] {
            count += 1;
            dip = f64::INFINITY;
        }
    }
    count
}

/// τ_s = (1/Γ31)/(1 + α/4).
pub fn superradiant_tau(alpha: f64, gamma31: f64) -> f64 {
    (1.0 / gamma31) / (1.0 + alpha / 4.0)
}

/// Thermal (geometric) photon-number distribution.
pub fn thermal_pn(mean: f64, n: u64) -> Result<f64> {
    if !(mean >= 0.0) {
        return Err(SfwmError::InvalidInput("mean photon number must be >= 0".into()));
    }
    if mean == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    Ok((n as f64 * mean.ln() - (n as f64 + 1.0) * mean.ln_1p()).exp())
}

/// Trapezoid rule on an arbitrary abscissa.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Nonclassicality metrics from traces and the spectra sampled on the same grid.
pub fn metrics_from(
    si: &CorrelationTrace,
    is: &CorrelationTrace,
    pts: &[SpectralPoint],
    grid: &FrequencyGrid,
    rates: &Rates,
) -> Result<NonclassicalityMetrics> {
    let gu = si.gamma_unit;
    let (rs, ri) = gamma_rates(rates, gu);
    if !(rs > 0.0) || !(ri > 0.0) {
        return Err(SfwmError::InvalidInput("metrics need positive rates".into()));
    }
    let dw = grid.step() / (2.0 * PI);
    let auto = |f: Vec<C>| -> f64 {
        let total: f64 = f.iter().map(|x| x.re).sum::<f64>() * dw;
        let (tau, g1) = transform(grid, &f);
        let zero = tau.iter().position(|t| *t == 0.0).unwrap_or(0);
        1.0 + g1[zero].norm_sqr() / (total * total)
    };
    let g2ss = auto(pts.iter().map(|p| C::new(p.s_paired + p.s_unpaired, 0.0)).collect());
    let g2ii = auto(pts.iter().map(|p| C::new(p.i_paired + p.i_unpaired, 0.0)).collect());
    let g2si_peak = si.peak_g2();
    let a_s = trapezoid(&si.tau, &si.psi.iter().map(|p| p.norm_sqr()).collect::<Vec<_>>()) / rs;
    let a_i = trapezoid(&is.tau, &is.psi.iter().map(|p| p.norm_sqr()).collect::<Vec<_>>()) / ri;
    Ok(NonclassicalityMetrics {
        g2si_peak,
        g2ss,
        g2ii,
        r_sb: g2si_peak - 1.0,
        f_csi: g2si_peak * g2si_peak / (g2ss * g2ii),
        a_s,
        a_i,
    })
}

pub fn metrics(scheme: &LevelScheme, drive: &DriveConfig, grid: &FrequencyGrid) -> Result<NonclassicalityMetrics> {
    let src = Source::new(scheme, drive)?;
    let rates = rates_model(&src)?;
    let (si, is, pts) = traces_model(&src, grid, &rates)?;
    metrics_from(&si, &is, &pts, grid, &rates)
}
