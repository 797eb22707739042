//! Paired and unpaired spectral densities, generation rates and pairing ratios.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    bilinear, coefficients, conj3, diffusion, CoefficientModel, DiffusionPair, DopplerShift, NoiseCoefficientSet,
    ParametricCoefficients,
};
use crate::error::{Result, SfwmError};
use crate::model::{rate_to_si, DriveConfig, FrequencyGrid, Geometry, LevelScheme, PopulationModel};
use crate::propagation::{phi1, propagators, transfer, PropagationModel, TransferMatrix};
use crate::quad::{gauss_legendre_on, integrate_real_line};
use crate::specfun::erf;
use crate::steady_state::{solve_steady, SteadyState};

type C = Complex64;
type Kern = [[C; 2]; 2];

const Z_NODES: usize = 64;
const RATE_REL_TOL: f64 = 1e-7;

fn z_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_on(Z_NODES, 0.0, 1.0))
}

/// Everything needed at one frequency: parametric coefficients and the 2×2
/// noise kernels X_S (normal-ordered) and X_I (anti-normal-ordered) indexed
/// by {signal, idler} noise weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub pc: ParametricCoefficients,
    pub xs: Kern,
    pub xi: Kern,
}

impl Kernel {
    pub fn from_noise(pc: ParametricCoefficients, noise: &NoiseCoefficientSet, d: &DiffusionPair) -> Self {
        let z = [noise.zeta_s, noise.zeta_i];
        let zc = [conj3(&noise.zeta_s), conj3(&noise.zeta_i)];
        let mut xs = [[C::new(0.0, 0.0); 2]; 2];
        let mut xi = xs;
        for a in 0..2 {
            for b in 0..2 {
                xs[a][b] = bilinear(&zc[a], &d.d_kj_jk, &z[b]);
                xi[a][b] = bilinear(&z[a], &d.d_jk_kj, &zc[b]);
            }
        }
        Kernel { pc, xs, xi }
    }
}

/// A frequency-resolved source of biphotons.
pub trait SpectralModel: Sync {
    fn kernel(&self, omega: f64) -> Result<Kernel>;
    fn propagation(&self) -> PropagationModel;
    fn gamma_unit(&self) -> f64;
    /// Characteristic spectral width, used to map the infinite frequency axis.
    fn rate_scale(&self) -> f64;
    /// Frequencies with sharp structure.
    fn breakpoints(&self) -> Vec<f64>;
    /// The pairing rate is taken from the idler side (warm ensembles).
    fn pairing_from_idler(&self) -> bool {
        false
    }
    /// Half-width of the band outside which correlation traces treat the
    /// spectrum as zero; `None` evaluates every sample.
    fn trace_band(&self) -> Option<f64> {
        None
    }
}

/// Cold-atom source.
#[derive(Debug, Clone)]
pub struct Source {
    pub scheme: LevelScheme,
    pub drive: DriveConfig,
    pub steady: SteadyState,
    pub diffusion: DiffusionPair,
    model: PropagationModel,
}

pub fn propagation_model(drive: &DriveConfig) -> PropagationModel {
    match (drive.geometry, drive.population_model) {
        (Geometry::Backward, _) => PropagationModel::Backward,
        (Geometry::Forward, PopulationModel::Gsa) => PropagationModel::Gsa,
        (Geometry::Forward, PopulationModel::Exact) => PropagationModel::Exact,
    }
}

impl Source {
    pub fn new(scheme: &LevelScheme, drive: &DriveConfig) -> Result<Self> {
        scheme.validate()?;
        for w in drive.validate()? {
            log::warn!("{w}");
        }
        let steady = solve_steady(scheme, drive, None)?;
        let diffusion = diffusion(scheme, &steady)?;
        Ok(Source { scheme: scheme.clone(), drive: drive.clone(), steady, diffusion, model: propagation_model(drive) })
    }

    /// Replace the diffusion matrices (e.g. zero them to switch off noise).
    pub fn with_diffusion(mut self, d: DiffusionPair) -> Self {
        self.diffusion = d;
        self
    }
}

impl SpectralModel for Source {
    fn kernel(&self, omega: f64) -> Result<Kernel> {
        let shift = DopplerShift::rest(&self.drive);
        let model = match self.drive.population_model {
            PopulationModel::Gsa => CoefficientModel::Gsa,
            PopulationModel::Exact => CoefficientModel::Exact(&self.steady),
        };
        let (pc, noise) = coefficients(&self.scheme, &self.drive, &shift, model, omega)?;
        Ok(Kernel::from_noise(pc, &noise, &self.diffusion))
    }

    fn propagation(&self) -> PropagationModel {
        self.model
    }

    fn gamma_unit(&self) -> f64 {
        self.scheme.gamma_unit
    }

    fn rate_scale(&self) -> f64 {
        default_rate_scale(&self.scheme, &self.drive)
    }

    fn breakpoints(&self) -> Vec<f64> {
        default_breakpoints(&self.drive)
    }
}

pub(crate) fn default_rate_scale(scheme: &LevelScheme, drive: &DriveConfig) -> f64 {
    let d = scheme.decoherence();
    1f64.max(0.5 * (drive.od * scheme.coupling31() * d.g31).sqrt()).max(0.25 * drive.od * scheme.coupling31())
}

pub(crate) fn default_breakpoints(drive: &DriveConfig) -> Vec<f64> {
    let mut b = vec![0.0, -drive.delta2, -drive.delta1];
    b.retain(|x| x.is_finite());
    b
}

/// Integrands at one frequency (not divided by 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub transfer: TransferMatrix,
    pub s_paired: f64,
    pub s_unpaired: f64,
    pub i_paired: f64,
    pub i_unpaired: f64,
    /// Signal–idler two-photon amplitude.
    pub psi_si: C,
    /// Idler–signal two-photon amplitude.
    pub psi_is: C,
}

impl SpectralPoint {
    /// Point outside the emission band.
    pub fn empty() -> Self {
        let z = C::new(0.0, 0.0);
        SpectralPoint {
            transfer: TransferMatrix::identity(),
            s_paired: 0.0,
            s_unpaired: 0.0,
            i_paired: 0.0,
            i_unpaired: 0.0,
            psi_si: z,
            psi_is: z,
        }
    }
}

fn form(x: &[C; 2], m: &Kern, y: &[C; 2]) -> C {
    let mut s = C::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            s += x[a] * m[a][b] * y[b];
        }
    }
    s
}

fn conj2(x: &[C; 2]) -> [C; 2] {
    [x[0].conj(), x[1].conj()]
}

/// z-integrated noise forms (su, iu, ψ_si, ψ_is).
fn noise_integrals(model: PropagationModel, k: &Kernel) -> Result<(f64, f64, C, C)> {
    let g = k.pc.gamma_i;
    if model == PropagationModel::Gsa && g.norm() > 1e-8 {
        // Propagators are affine in e = exp(−Γ(1−z)).
        let ks = k.pc.kappa_s / g;
        let ki = k.pc.kappa_i / g;
        let z = C::new(0.0, 0.0);
        let c0 = [C::new(1.0, 0.0), -ks];
        let c1 = [z, ks];
        let d0 = [-ki, z];
        let d1 = [ki, C::new(1.0, 0.0)];
        let e = phi1(-g);
        let ec = e.conj();
        let e2 = phi1(C::new(-2.0 * g.re, 0.0));
        let lin = |x0: &[C; 2], x1: &[C; 2], m: &Kern, y0: &[C; 2], y1: &[C; 2], ex: C, ey: C| -> C {
            form(x0, m, y0) + form(x1, m, y0) * ex + form(x0, m, y1) * ey + form(x1, m, y1) * e2
        };
        let (c0c, c1c, d0c, d1c) = (conj2(&c0), conj2(&c1), conj2(&d0), conj2(&d1));
        let su = lin(&c0c, &c1c, &k.xs, &c0, &c1, ec, e);
        let iu = lin(&d0, &d1, &k.xi, &d0c, &d1c, e, ec);
        let psi_si = lin(&d0c, &d1c, &k.xs, &c0, &c1, ec, e);
        let psi_is = lin(&c0, &c1, &k.xi, &d0c, &d1c, e, ec);
        return Ok((su.re, iu.re, psi_si, psi_is));
    }
    let (zn, zw) = z_rule();
    let mut su = 0.0;
    let mut iu = 0.0;
    let mut psi_si = C::new(0.0, 0.0);
    let mut psi_is = C::new(0.0, 0.0);
    for (z, w) in zn.iter().zip(zw) {
        let [a2, b2, c2, d2] = propagators(model, &k.pc, *z)?;
        let c = [a2, b2];
        let d = [c2, d2];
        let (cc, dc) = (conj2(&c), conj2(&d));
        su += w * form(&cc, &k.xs, &c).re;
        iu += w * form(&d, &k.xi, &dc).re;
        psi_si += *w * form(&dc, &k.xs, &c);
        psi_is += *w * form(&c, &k.xi, &dc);
    }
    Ok((su, iu, psi_si, psi_is))
}

pub fn evaluate(model: PropagationModel, k: &Kernel) -> Result<SpectralPoint> {
    let t = transfer(model, &k.pc);
    let (su, iu, nsi, nis) = noise_integrals(model, k)?;
    Ok(SpectralPoint {
        transfer: t,
        s_paired: t.b1.norm_sqr(),
        s_unpaired: su,
        i_paired: t.c1.norm_sqr(),
        i_unpaired: iu,
        psi_si: t.b1 * t.d1.conj() + nsi,
        psi_is: t.a1 * t.c1.conj() + nis,
    })
}

pub fn spectral_point<M: SpectralModel + ?Sized>(m: &M, omega: f64) -> Result<SpectralPoint> {
    evaluate(m.propagation(), &m.kernel(omega)?)
}

/// Rates in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub r_s: f64,
    pub r_i: f64,
    pub r_sp: f64,
    pub r_ip: f64,
    pub r_su: f64,
    pub r_iu: f64,
    /// R_p: the signal paired rate for cold ensembles, idler paired rate for warm ones.
    pub r_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub grid: FrequencyGrid,
    pub s_paired: Vec<f64>,
    pub s_unpaired: Vec<f64>,
    pub i_paired: Vec<f64>,
    pub i_unpaired: Vec<f64>,
    pub rates: Rates,
}

fn clamp_density(x: f64) -> f64 {
    if x < -1e-12 {
        log::debug!("negative spectral density {x:e} clamped");
    }
    x.max(0.0)
}

/// Spectral densities on `grid` (per 2π) plus rates from adaptive quadrature.
pub fn decompose_model<M: SpectralModel + ?Sized>(m: &M, grid: &FrequencyGrid) -> Result<SpectralDecomposition> {
    let pts: Vec<SpectralPoint> = grid
        .samples
        .par_iter()
        .map(|&w| spectral_point(m, w))
        .collect::<Result<Vec<_>>>()?;
    let f = 1.0 / (2.0 * PI);
    let rates = rates_model(m)?;
    Ok(SpectralDecomposition {
        grid: grid.clone(),
        s_paired: pts.iter().map(|p| clamp_density(p.s_paired * f)).collect(),
        s_unpaired: pts.iter().map(|p| clamp_density(p.s_unpaired * f)).collect(),
        i_paired: pts.iter().map(|p| clamp_density(p.i_paired * f)).collect(),
        i_unpaired: pts.iter().map(|p| clamp_density(p.i_unpaired * f)).collect(),
        rates,
    })
}

pub fn decompose(scheme: &LevelScheme, drive: &DriveConfig, grid: &FrequencyGrid) -> Result<SpectralDecomposition> {
    decompose_model(&Source::new(scheme, drive)?, grid)
}

/// Rough magnitude of ∫f dω from a fixed midpoint rule on the mapped axis.
fn coarse_estimate<const N: usize, F: Fn(f64) -> [f64; N] + Sync>(f: &F, s: f64) -> [f64; N] {
    let n = 2000;
    let parts: Vec<[f64; N]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = -1.0 + (k as f64 + 0.5) * 2.0 / n as f64;
            let d = 1.0 - t * t;
            let jac = s * (1.0 + t * t) / (d * d);
            let mut v = f(s * t / d);
            v.iter_mut().for_each(|x| *x = (*x * jac * 2.0 / n as f64).abs());
            v
        })
        .collect();
    let mut out = [0.0; N];
    for p in parts {
        for k in 0..N {
            out[k] += p[k];
        }
    }
    out
}

/// ∫ dω/2π of vector integrands, in Γ units.
pub fn integrate_spectrum<const N: usize, M, F>(m: &M, f: F) -> Result<[f64; N]>
where
    M: SpectralModel + ?Sized,
    F: Fn(&SpectralPoint) -> [f64; N] + Sync,
{
    let failed = std::sync::Mutex::new(None);
    let g = |w: f64| -> [f64; N] {
        match spectral_point(m, w) {
            Ok(p) => f(&p),
            Err(e) => {
                failed.lock().unwrap().get_or_insert(e);
                [0.0; N]
            }
        }
    };
    let scale = m.rate_scale();
    let est = coarse_estimate(&g, scale);
    let abs = 1e-10 * est.iter().cloned().fold(0.0, f64::max) + 1e-300;
    let r = integrate_real_line(g, scale, &m.breakpoints(), RATE_REL_TOL, abs)?;
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    Ok(r.map(|x| x / (2.0 * PI)))
}

pub fn rates_model<M: SpectralModel + ?Sized>(m: &M) -> Result<Rates> {
    let [sp, su, ip, iu] = integrate_spectrum(m, |p| [p.s_paired, p.s_unpaired, p.i_paired, p.i_unpaired])?;
    let g = m.gamma_unit();
    let r = |x: f64| rate_to_si(x, g);
    Ok(Rates {
        r_s: r(sp + su),
        r_i: r(ip + iu),
        r_sp: r(sp),
        r_ip: r(ip),
        r_su: r(su),
        r_iu: r(iu),
        r_p: if m.pairing_from_idler() { r(ip) } else { r(sp) },
    })
}

/// Numeric pairing rate ∫|B1|²dω/2π in s⁻¹.
pub fn pairing_rate(scheme: &LevelScheme, drive: &DriveConfig) -> Result<f64> {
    let src = Source::new(scheme, drive)?;
    let [sp] = integrate_spectrum(&src, |p| [p.s_paired])?;
    Ok(rate_to_si(sp, scheme.gamma_unit))
}

/// Closed-form pairing rates (full, large-OD asymptotic) in s⁻¹.
pub fn pairing_rate_analytic(scheme: &LevelScheme, drive: &DriveConfig) -> Result<(f64, f64)> {
    if drive.delta1 == 0.0 {
        return Err(SfwmError::Domain("analytic pairing rate requires delta1 != 0".into()));
    }
    if drive.od < 10.0 {
        log::warn!("analytic pairing rate is a large-OD result; OD = {} < 10", drive.od);
    }
    let d = scheme.decoherence();
    let alpha = drive.od;
    let g31 = scheme.coupling31();
    let g43 = scheme.coupling43();
    let pump = (drive.omega_c * drive.omega_d
        / (2.0 * drive.delta1 * C::new(d.g41, 2.0 * drive.delta2)))
    .norm_sqr();
    let k = alpha * g31 / (8.0 * d.g31);
    let full = (alpha * g31 * d.g31 / (2.0 * PI)).sqrt()
        * (scheme.s_lambda * g43 / g31)
        * pump
        * ((-k).exp() + (PI * k).sqrt() * erf(k.sqrt()) - 1.0 / 2f64.sqrt());
    let asym = scheme.s_lambda * g43 / (16.0 * g31)
        * (alpha * g31 * d.g31).sqrt()
        * ((alpha * g31 / d.g31).sqrt() - 2.0 / PI.sqrt())
        * 4.0
        * pump;
    Ok((rate_to_si(full, scheme.gamma_unit), rate_to_si(asym, scheme.gamma_unit)))
}

/// (r_ps, r_pi) = (R_p/R_s, R_p/R_i).
pub fn pairing_ratios(decomp: &SpectralDecomposition) -> Result<(f64, f64)> {
    let r = &decomp.rates;
    if !(r.r_s > 0.0) || !(r.r_i > 0.0) {
        return Err(SfwmError::InvalidInput("pairing ratios need positive total rates".into()));
    }
    Ok((r.r_p / r.r_s, r.r_p / r.r_i))
}

/// FWHM of a sampled density, by linear interpolation.
pub fn fwhm(grid: &FrequencyGrid, density: &[f64]) -> Option<f64> {
    let (k, &peak) = density.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    if !(peak > 0.0) {
        return None;
    }
    let half = peak / 2.0;
    let w = &grid.samples;
    let mut lo = None;
    for j in (0..k).rev() {
        if density[j] < half {
            let t = (half - density[j]) / (density[j + 1] - density[j]);
            lo = Some(w[j] + t * (w[j + 1] - w[j]));
            break;
        }
    }
    let mut hi = None;
    for j in k + 1..density.len() {
        if density[j] < half {
            let t = (density[j - 1] - half) / (density[j - 1] - density[j]);
            hi = Some(w[j - 1] + t * (w[j] - w[j - 1]));
            break;
        }
    }
    Some(hi? - lo?)
}
