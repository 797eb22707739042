//! Command-line front end: configuration, commands, sweeps, figure pipelines
//! and the self-check suite. Every artifact is plain text and deterministic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coefficients::{
    coefficients, exact_parametric, gsa_parametric, CoefficientModel, DopplerShift, ParametricCoefficients,
};
use crate::correlations::{
    analytic_wavefunction, fit_decay, metrics_from, superradiant_tau, traces_model, CorrelationTrace,
    NonclassicalityMetrics,
};
use crate::doppler::{
    default_velocity_grid, fit_scaling, velocity_grid, velocity_grid_resolved, warm_correlation_grid, VelocityGrid,
    WarmSource, PANEL_FACTOR, PANEL_NODES,
};
use crate::error::{Result, SfwmError};
use crate::model::{
    preset, rate_to_si, time_to_ns, tu_comparison_drive, DriveConfig, FrequencyGrid, Geometry, LevelScheme,
    PopulationModel, RunConfig,
};
use crate::propagation::{ode_reference, phi1, transfer, PropagationModel};
use crate::spectra::{
    decompose_model, pairing_rate_analytic, rates_model, spectral_point, Rates, Source,
    SpectralDecomposition, SpectralModel,
};
use crate::steady_state::solve_steady;

pub const SCHEMA_VERSION: u32 = 1;
pub const WORKERS_ENV: &str = "SFWM_WORKERS";
pub const FIGURES: [&str; 8] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];
const DEFAULT_PRESET: &str = "rb87_1529_780";

#[derive(Debug, Parser)]
#[command(name = "sfwm", version, about = "Biphoton generation in diamond-type atomic ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Args, Default)]
pub struct GlobalOpts {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Named parameter preset (ignored when --config is given).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "sfwm-out")]
    pub out: PathBuf,
    /// Optical depth override.
    #[arg(long, global = true)]
    pub od: Option<f64>,
    /// Vapor temperature in K; enables velocity averaging.
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Frequency-grid half width in Γ.
    #[arg(long, global = true)]
    pub grid_width: Option<f64>,
    /// Frequency-grid size (power of two).
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Gauss–Hermite velocity nodes; the default is a graded composite rule.
    #[arg(long, global = true)]
    pub velocity_nodes: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub geometry: Option<GeometryArg>,
    #[arg(long, global = true, value_enum)]
    pub population_model: Option<PopulationArg>,
    /// Coincidence bin width in ns.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub coincidence_window: f64,
    /// Run the self-check suite after the command.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GeometryArg {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PopulationArg {
    Gsa,
    Exact,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Paired, unpaired and total spectra.
    Spectrum,
    /// Generation, pairing and noise rates.
    Rates,
    /// Signal–idler correlation traces and decay times.
    Correlation,
    /// g², Cauchy–Schwarz factor and correlated areas.
    Metrics,
    /// One row of rates and correlation observables per parameter value.
    Sweep {
        /// param:start:stop:log|lin, e.g. od:0.1:100:log
        #[arg(long)]
        axis: String,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Skip correlation traces.
        #[arg(long)]
        rates_only: bool,
    },
    /// Data behind one of the figures fig2 … fig9.
    Figure {
        id: Option<String>,
        #[arg(long = "figure")]
        figure: Option<String>,
    },
    /// ODE oracle and convergence gates.
    Verify,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Setup {
    pub scheme: LevelScheme,
    pub drive: DriveConfig,
    pub temperature: Option<f64>,
    pub velocity_nodes: Option<usize>,
    pub grid_width: Option<f64>,
    pub grid_n: Option<usize>,
    pub window_ns: f64,
}

impl Setup {
    pub fn from_preset(name: &str) -> Result<Self> {
        let (scheme, drive) = preset(name)?;
        Ok(Setup {
            scheme,
            drive,
            temperature: None,
            velocity_nodes: None,
            grid_width: None,
            grid_n: None,
            window_ns: 1.0,
        })
    }

    pub fn from_opts(o: &GlobalOpts) -> Result<Self> {
        let cfg = match &o.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::from_preset(o.preset.as_deref().unwrap_or(DEFAULT_PRESET)),
        };
        let (scheme, mut drive) = cfg.resolve()?;
        if let Some(od) = o.od {
            drive.od = od;
        }
        if let Some(g) = o.geometry {
            drive.geometry = match g {
                GeometryArg::Forward => Geometry::Forward,
                GeometryArg::Backward => Geometry::Backward,
            };
        }
        if let Some(p) = o.population_model {
            drive.population_model = match p {
                PopulationArg::Gsa => PopulationModel::Gsa,
                PopulationArg::Exact => PopulationModel::Exact,
            };
        }
        if !(o.coincidence_window > 0.0) {
            return Err(SfwmError::InvalidInput("coincidence window must be > 0 ns".into()));
        }
        Ok(Setup {
            scheme,
            drive,
            temperature: o.temperature.or(cfg.temperature),
            velocity_nodes: o.velocity_nodes,
            grid_width: o.grid_width,
            grid_n: o.grid_n,
            window_ns: o.coincidence_window,
        })
    }

    pub fn with_drive(&self, drive: DriveConfig) -> Self {
        Setup { drive, ..self.clone() }
    }

    pub fn with_temperature(&self, t: f64) -> Self {
        Setup { temperature: Some(t), ..self.clone() }
    }

    /// Copy with one named parameter replaced.
    pub fn with_param(&self, param: &str, value: f64) -> Result<Self> {
        let mut s = self.clone();
        let d = &mut s.drive;
        match param {
            "od" => d.od = value,
            "omega" => {
                d.omega_c = Complex64::new(value, 0.0);
                d.omega_d = Complex64::new(value, 0.0);
            }
            "omega_c" => d.omega_c = Complex64::new(value, 0.0),
            "omega_d" => d.omega_d = Complex64::new(value, 0.0),
            "delta1" => d.delta1 = value,
            "delta2" => d.delta2 = value,
            "dk_l" => d.dk_l = value,
            "temperature" => s.temperature = Some(value),
            _ => {
                return Err(SfwmError::InvalidInput(format!(
                    "unknown sweep parameter `{param}`; valid: od, omega, omega_c, omega_d, delta1, delta2, dk_l, temperature"
                )))
            }
        }
        Ok(s)
    }

    pub fn velocity_grid(&self, temperature: f64) -> Result<VelocityGrid> {
        match self.velocity_nodes {
            Some(n) => velocity_grid(temperature, self.scheme.mass, n),
            None => default_velocity_grid(&self.scheme, &self.drive, temperature),
        }
    }

    pub fn emitter(&self) -> Result<Emitter> {
        match self.temperature {
            Some(t) => Ok(Emitter::Warm(Box::new(WarmSource::new(&self.scheme, &self.drive, &self.velocity_grid(t)?)?))),
            None => Ok(Emitter::Cold(Box::new(Source::new(&self.scheme, &self.drive)?))),
        }
    }

    fn override_grid(&self, g: FrequencyGrid) -> Result<FrequencyGrid> {
        if self.grid_n.is_none() && self.grid_width.is_none() {
            return Ok(g);
        }
        FrequencyGrid::new(self.grid_n.unwrap_or(g.n), self.grid_width.unwrap_or(g.half_width))
    }

    pub fn spectrum_grid(&self, e: &Emitter) -> Result<FrequencyGrid> {
        let base = FrequencyGrid::for_spectrum(self.drive.od);
        let g = match e {
            Emitter::Cold(_) => base,
            Emitter::Warm(w) => FrequencyGrid::new(base.n, base.half_width.max(8.0 * w.doppler_width()))?,
        };
        self.override_grid(g)
    }

    pub fn correlation_grid(&self, e: &Emitter) -> Result<FrequencyGrid> {
        let g = match e {
            Emitter::Cold(_) => FrequencyGrid::for_correlation(self.drive.od),
            Emitter::Warm(w) => warm_correlation_grid(w),
        };
        self.override_grid(g)
    }
}

pub enum Emitter {
    Cold(Box<Source>),
    Warm(Box<WarmSource>),
}

impl Emitter {
    pub fn model(&self) -> &dyn SpectralModel {
        match self {
            Emitter::Cold(s) => s.as_ref(),
            Emitter::Warm(w) => w.as_ref(),
        }
    }
}

/// Correlation traces with the rates and metrics derived from them.
pub struct CorrelationRun {
    pub rates: Rates,
    pub si: CorrelationTrace,
    pub is: CorrelationTrace,
    pub metrics: NonclassicalityMetrics,
}

pub fn run_correlation(setup: &Setup) -> Result<CorrelationRun> {
    let e = setup.emitter()?;
    let grid = setup.correlation_grid(&e)?;
    let rates = rates_model(e.model())?;
    let (si, is, pts) = traces_model(e.model(), &grid, &rates)?;
    let metrics = metrics_from(&si, &is, &pts, &grid, &rates)?;
    Ok(CorrelationRun { rates, si, is, metrics })
}

pub fn run_rates(setup: &Setup) -> Result<Rates> {
    rates_model(setup.emitter()?.model())
}

pub fn run_spectrum(setup: &Setup) -> Result<SpectralDecomposition> {
    let e = setup.emitter()?;
    decompose_model(e.model(), &setup.spectrum_grid(&e)?)
}

// ---------------------------------------------------------------------------
// Artifacts

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| Cell::Num(*x)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) if x.is_finite() => format!("{x:.11e}"),
                    Cell::Num(x) => format!("{x}").to_lowercase(),
                    Cell::Text(t) => t.replace([',', '\n'], ";"),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Named text files produced by a command.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn csv(&mut self, name: &str, t: &Table) {
        self.files.push((format!("{name}.csv"), t.to_csv()));
    }

    pub fn json(&mut self, name: &str, mut v: Value) {
        if let Value::Object(m) = &mut v {
            m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        }
        let text = serde_json::to_string_pretty(&v).expect("json serializes");
        self.files.push((format!("{name}.json"), text + "\n"));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn extend(&mut self, o: Artifacts) {
        self.files.extend(o.files);
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

fn rates_json(r: &Rates) -> Value {
    json!({
        "r_s": r.r_s, "r_i": r.r_i, "r_sp": r.r_sp, "r_ip": r.r_ip,
        "r_su": r.r_su, "r_iu": r.r_iu, "r_p": r.r_p,
        "r_ps": r.r_p / r.r_s, "r_pi": r.r_p / r.r_i,
    })
}

fn metrics_json(m: &NonclassicalityMetrics) -> Value {
    json!({
        "g2si_peak": m.g2si_peak, "g2ss": m.g2ss, "g2ii": m.g2ii,
        "r_sb": m.r_sb, "f_csi": m.f_csi, "a_s": m.a_s, "a_i": m.a_i,
    })
}

fn setup_json(s: &Setup) -> Value {
    let d = &s.drive;
    json!({
        "scheme": s.scheme.name,
        "od": d.od,
        "omega_c": d.omega_c.re,
        "omega_d": d.omega_d.re,
        "delta1": d.delta1,
        "delta2": d.delta2,
        "dk_l": d.dk_l,
        "geometry": format!("{:?}", d.geometry).to_lowercase(),
        "population_model": format!("{:?}", d.population_model).to_lowercase(),
        "temperature": s.temperature,
    })
}

fn decay_json(t: &CorrelationTrace) -> Value {
    match &t.decay {
        Some(d) => json!({
            "decay_ns": time_to_ns(d.tau_d, t.gamma_unit),
            "tau_1e_ns": time_to_ns(d.tau_1e, t.gamma_unit),
            "fit_points": d.points,
            "fit_residual": d.residual,
        }),
        None => Value::Null,
    }
}

fn spectrum_table(d: &SpectralDecomposition) -> Table {
    let mut t = Table::new(&["omega", "s_paired", "s_unpaired", "s_total", "i_paired", "i_unpaired", "i_total"]);
    for (k, w) in d.grid.samples.iter().enumerate() {
        let (sp, su, ip, iu) = (d.s_paired[k], d.s_unpaired[k], d.i_paired[k], d.i_unpaired[k]);
        t.push_nums(&[*w, sp, su, sp + su, ip, iu, ip + iu]);
    }
    t
}

/// Sample of a trace at delay `t` (nearest grid point).
fn value_at(tau: &[f64], y: &[f64], t: f64) -> f64 {
    let k = tau.partition_point(|x| *x < t);
    let k = if k == 0 {
        0
    } else if k == tau.len() || (t - tau[k - 1]) < (tau[k] - t) {
        k - 1
    } else {
        k
    };
    y[k]
}

/// Display window for a trace: a few decay times either side of zero.
fn trace_limit(t: &CorrelationTrace, gamma31: f64) -> f64 {
    match &t.decay {
        Some(d) => 12.0 * d.tau_d.max(d.tau_1e),
        None => 5.0 / gamma31,
    }
}

fn trace_table(run: &CorrelationRun, window_ns: f64, gamma31: f64) -> Table {
    let si = &run.si;
    let gu = si.gamma_unit;
    let limit = trace_limit(si, gamma31);
    let psi2: Vec<f64> = si.psi.iter().map(|p| p.norm_sqr()).collect();
    let is_psi2: Vec<f64> = run.is.psi.iter().map(|p| p.norm_sqr()).collect();
    let window = window_ns * 1e-9;
    let mut t = Table::new(&["tau_ns", "g2si", "g2is", "psi_abs2", "coincidence_rate_s", "coincidence_rate_i"]);
    let stride = (si.tau.iter().filter(|x| x.abs() <= limit).count() / 20_000).max(1);
    for (k, &tau) in si.tau.iter().enumerate().filter(|(_, x)| x.abs() <= limit).step_by(stride) {
        let g2is = value_at(&run.is.tau, &run.is.g2si, tau);
        let p_is = value_at(&run.is.tau, &is_psi2, tau);
        let rc = |p: f64| (si.background + p) * gu * gu * window;
        t.push_nums(&[time_to_ns(tau, gu), si.g2si[k], g2is, psi2[k], rc(psi2[k]), rc(p_is)]);
    }
    t
}

fn correlation_json(s: &Setup, run: &CorrelationRun) -> Value {
    json!({
        "setup": setup_json(s),
        "rates": rates_json(&run.rates),
        "signal_idler": decay_json(&run.si),
        "idler_signal": decay_json(&run.is),
        "metrics": metrics_json(&run.metrics),
        "coincidence_window_ns": s.window_ns,
    })
}

// ---------------------------------------------------------------------------
// Commands

pub fn cmd_spectrum(s: &Setup) -> Result<Artifacts> {
    let d = run_spectrum(s)?;
    let mut a = Artifacts::default();
    a.csv("spectrum", &spectrum_table(&d));
    a.json(
        "spectrum",
        json!({
            "setup": setup_json(s),
            "rates": rates_json(&d.rates),
            "fwhm_s_paired": crate::spectra::fwhm(&d.grid, &d.s_paired),
            "fwhm_i_paired": crate::spectra::fwhm(&d.grid, &d.i_paired),
            "grid": {"n": d.grid.n, "half_width": d.grid.half_width},
        }),
    );
    Ok(a)
}

pub fn cmd_rates(s: &Setup) -> Result<Artifacts> {
    let r = run_rates(s)?;
    let analytic = if s.temperature.is_none() && s.drive.delta1 != 0.0 {
        pairing_rate_analytic(&s.scheme, &s.drive).ok().map(|(full, asym)| json!({"full": full, "asymptotic": asym}))
    } else {
        None
    };
    let mut a = Artifacts::default();
    a.json("rates", json!({"setup": setup_json(s), "rates": rates_json(&r), "r_p_analytic": analytic}));
    Ok(a)
}

pub fn cmd_correlation(s: &Setup) -> Result<Artifacts> {
    let run = run_correlation(s)?;
    let mut a = Artifacts::default();
    a.csv("correlation", &trace_table(&run, s.window_ns, s.scheme.gamma31));
    a.json("correlation", correlation_json(s, &run));
    Ok(a)
}

pub fn cmd_metrics(s: &Setup) -> Result<Artifacts> {
    let run = run_correlation(s)?;
    let mut a = Artifacts::default();
    a.json(
        "metrics",
        json!({"setup": setup_json(s), "rates": rates_json(&run.rates), "metrics": metrics_json(&run.metrics)}),
    );
    Ok(a)
}

/// Parsed `param:start:stop:log|lin` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub log: bool,
}

impl SweepAxis {
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || SfwmError::InvalidInput(format!("axis `{spec}` must look like param:start:stop:log|lin"));
        if parts.len() != 4 || parts[0].is_empty() {
            return Err(bad());
        }
        let start: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts[3] {
            "log" => true,
            "lin" => false,
            _ => return Err(bad()),
        };
        if !start.is_finite() || !stop.is_finite() || (log && (start <= 0.0 || stop <= 0.0)) {
            return Err(bad());
        }
        Ok(SweepAxis { param: parts[0].to_string(), start, stop, log })
    }

    pub fn values(&self, points: usize) -> Result<Vec<f64>> {
        if points == 0 {
            return Err(SfwmError::InvalidInput("sweep axis is empty (points = 0)".into()));
        }
        if points == 1 {
            return Ok(vec![self.start]);
        }
        let f = |k: usize| k as f64 / (points - 1) as f64;
        Ok((0..points)
            .map(|k| {
                if self.log {
                    (self.start.ln() + f(k) * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + f(k) * (self.stop - self.start)
                }
            })
            .collect())
    }
}

pub fn cmd_sweep(s: &Setup, axis: &SweepAxis, points: usize, rates_only: bool) -> Result<Artifacts> {
    let values = axis.values(points)?;
    s.with_param(&axis.param, values[0])?;
    let rows: Vec<Vec<Cell>> = values
        .par_iter()
        .map(|&v| {
            let p = s.with_param(&axis.param, v).expect("parameter name checked");
            let nan = f64::NAN;
            let mut row: Vec<Cell> = vec![v.into()];
            let result = if rates_only {
                run_rates(&p).map(|r| (r, None))
            } else {
                run_correlation(&p).map(|c| (c.rates, Some(c)))
            };
            match result {
                Ok((r, c)) => {
                    row.extend([r.r_s, r.r_i, r.r_sp, r.r_ip, r.r_su, r.r_iu, r.r_p].map(Cell::from));
                    let (dec, peak, fcsi) = match &c {
                        Some(c) => (c.si.decay_ns().unwrap_or(nan), c.metrics.g2si_peak, c.metrics.f_csi),
                        None => (nan, nan, nan),
                    };
                    row.extend([dec, peak, fcsi].map(Cell::from));
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend([nan; 10].map(Cell::from));
                    row.push(format!("failed: {e}").into());
                }
            }
            row
        })
        .collect();
    let mut t = Table::new(&[
        axis.param.as_str(),
        "r_s",
        "r_i",
        "r_sp",
        "r_ip",
        "r_su",
        "r_iu",
        "r_p",
        "decay_ns",
        "g2si_peak",
        "f_csi",
        "status",
    ]);
    let failed = rows.iter().filter(|r| matches!(r.last(), Some(Cell::Text(x)) if x != "ok")).count();
    rows.into_iter().for_each(|r| t.push(r));
    let mut a = Artifacts::default();
    a.csv("sweep", &t);
    a.json(
        "sweep",
        json!({
            "setup": setup_json(s),
            "axis": {"param": axis.param, "start": axis.start, "stop": axis.stop, "log": axis.log, "points": points},
            "failed_points": failed,
        }),
    );
    Ok(a)
}

// ---------------------------------------------------------------------------
// Figures

fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    SweepAxis { param: String::new(), start: a, stop: b, log: true }.values(n).expect("n > 0")
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn od_key(od: f64) -> String {
    format!("od{od}")
}

fn decay_ns_or_nan(t: &CorrelationTrace) -> f64 {
    t.decay_ns().unwrap_or(f64::NAN)
}

/// Decay time of the large-OD closed-form wavefunction on the trace's own axis.
pub fn analytic_decay_ns(s: &Setup, trace: &CorrelationTrace) -> Result<f64> {
    let limit = trace_limit(trace, s.scheme.gamma31);
    let tau: Vec<f64> = trace.tau.iter().cloned().filter(|t| *t > 0.0 && *t <= limit).collect();
    let psi = analytic_wavefunction(&s.scheme, &s.drive, &tau)?;
    let y: Vec<f64> = psi.iter().map(|p| p.norm_sqr()).collect();
    Ok(time_to_ns(fit_decay(&tau, &y)?.tau_d, s.scheme.gamma_unit))
}

fn fig2() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_1529_780")?;
    let s10 = base.with_param("od", 10.0)?;
    let d = run_spectrum(&s10)?;
    let mut a = Artifacts::default();
    a.csv("fig2_spectra_od10", &spectrum_table(&d));
    let alt = Setup::from_preset("rb87_1367_780")?;
    let ods = log_space(0.1, 1000.0, 13);
    let mut t = Table::new(&["od", "r_s", "r_i", "r_s_1367", "r_i_1367"]);
    let rows: Vec<Result<[f64; 5]>> = ods
        .par_iter()
        .map(|&od| {
            let r = run_rates(&base.with_param("od", od)?)?;
            let q = run_rates(&alt.with_param("od", od)?)?;
            Ok([od, r.r_s, r.r_i, q.r_s, q.r_i])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    rows.iter().for_each(|r| t.push_nums(r));
    a.csv("fig2_rates_vs_od", &t);
    let last = rows.last().expect("rows");
    a.json(
        "fig2",
        json!({
            "rates_od10": rates_json(&d.rates),
            "rs_od1000": last[1], "ri_od1000": last[2],
            "rs_1367_od1000": last[3], "ri_1367_od1000": last[4],
            "slope_rs_vs_od_100_1000": log_slope(&ods[8..], &rows[8..].iter().map(|r| r[1]).collect::<Vec<_>>()),
        }),
    );
    Ok(a)
}

fn fig3() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_1529_780")?;
    let mut a = Artifacts::default();
    let mut summary = serde_json::Map::new();
    for od in [0.1, 10.0] {
        let s = base.with_param("od", od)?;
        let src = Source::new(&s.scheme, &s.drive)?;
        let grid = FrequencyGrid::for_spectrum(od);
        let mut t = Table::new(&["omega", "r_p", "absorption", "emission"]);
        let pts: Vec<[f64; 4]> = grid
            .samples
            .par_iter()
            .map(|&w| {
                let k = src.kernel(w)?;
                let p = crate::spectra::evaluate(src.propagation(), &k)?;
                let absn = phi1(-k.pc.gamma_i).norm_sqr();
                Ok([w, p.s_paired, absn, k.pc.kappa_s.norm_sqr()])
            })
            .collect::<Result<_>>()?;
        let max_e = pts.iter().map(|p| p[3]).fold(0.0, f64::max);
        let max_a = pts.iter().map(|p| p[2]).fold(0.0, f64::max);
        for p in &pts {
            t.push_nums(&[p[0], p[1] / max_e, p[2] / max_a, p[3] / max_e]);
        }
        let dens: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        summary.insert(format!("fwhm_rp_{}", od_key(od)), json!(crate::spectra::fwhm(&grid, &dens)));
        a.csv(&format!("fig3_spectrum_{}", od_key(od)), &t);
    }
    let ods = log_space(0.1, 1000.0, 17);
    let rows: Vec<[f64; 3]> = ods
        .par_iter()
        .map(|&od| {
            let s = base.with_param("od", od)?;
            let rp = run_rates(&s)?.r_p;
            let ana = if od >= 10.0 { pairing_rate_analytic(&s.scheme, &s.drive)?.0 } else { f64::NAN };
            Ok([od, rp, ana])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["od", "r_p", "r_p_analytic"]);
    rows.iter().for_each(|r| t.push_nums(r));
    a.csv("fig3_rp_vs_od", &t);
    let last = rows.last().expect("rows");
    summary.insert("rp_od1000".into(), json!(last[1]));
    summary.insert("rp_analytic_od1000".into(), json!(last[2]));
    a.json("fig3", Value::Object(summary));
    Ok(a)
}

fn fig4() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_1529_780")?;
    let rb85 = Setup::from_preset("rb85_776_780_chaneliere")?;
    let mut a = Artifacts::default();
    let mut decays = serde_json::Map::new();
    for (name, s) in [("od0.1", base.with_param("od", 0.1)?), ("od10", base.with_param("od", 10.0)?)] {
        let run = run_correlation(&s)?;
        decays.insert(name.into(), json!(decay_ns_or_nan(&run.si)));
        a.csv(&format!("fig4_trace_{name}"), &trace_table(&run, s.window_ns, s.scheme.gamma31));
    }
    let run = run_correlation(&rb85)?;
    a.csv("fig4_trace_rb85_od25", &trace_table(&run, rb85.window_ns, rb85.scheme.gamma31));
    let rb85_decay = decay_ns_or_nan(&run.si);
    let ods = log_space(2.0, 100.0, 12);
    let rows: Vec<[f64; 3]> = ods
        .par_iter()
        .map(|&od| {
            let r = run_correlation(&rb85.with_param("od", od)?)?;
            Ok([od, 1.0 / od, decay_ns_or_nan(&r.si)])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["od", "inv_od", "decay_ns"]);
    rows.iter().for_each(|r| t.push_nums(r));
    a.csv("fig4_decay_vs_inv_od", &t);
    a.json("fig4", json!({"decay_ns": decays, "rb85_backward_od25_decay_ns": rb85_decay}));
    Ok(a)
}

fn fig5() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_1529_780")?;
    let gu = base.scheme.gamma_unit;
    let ods = log_space(1.0, 100.0, 20);
    let rows: Vec<[f64; 4]> = ods
        .par_iter()
        .map(|&od| {
            let s = base.with_param("od", od)?;
            let run = run_correlation(&s)?;
            let ana = if od >= 10.0 { analytic_decay_ns(&s, &run.si).unwrap_or(f64::NAN) } else { f64::NAN };
            let ts = time_to_ns(superradiant_tau(od * s.scheme.coupling31(), s.scheme.gamma31), gu);
            Ok([od, decay_ns_or_nan(&run.si), ts, ana])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["od", "decay_ns", "tau_s_ns", "decay_analytic_ns"]);
    rows.iter().for_each(|r| t.push_nums(r));
    let mut a = Artifacts::default();
    a.csv("fig5_decay_vs_od", &t);
    for od in [30.0, 100.0] {
        let s = base.with_param("od", od)?;
        let run = run_correlation(&s)?;
        let limit = trace_limit(&run.si, s.scheme.gamma31);
        let idx: Vec<usize> = (0..run.si.tau.len()).filter(|&k| run.si.tau[k] > 0.0 && run.si.tau[k] <= limit).collect();
        let tau: Vec<f64> = idx.iter().map(|&k| run.si.tau[k]).collect();
        let ana = analytic_wavefunction(&s.scheme, &s.drive, &tau)?;
        let mut t = Table::new(&["tau_ns", "psi_abs2", "psi_abs2_analytic"]);
        for (j, &k) in idx.iter().enumerate() {
            t.push_nums(&[time_to_ns(tau[j], gu), run.si.psi[k].norm_sqr(), ana[j].norm_sqr()]);
        }
        a.csv(&format!("fig5_trace_{}", od_key(od)), &t);
    }
    let max_dev = rows
        .iter()
        .map(|r| ((r[1] - r[2]) / r[2]).abs())
        .fold(0.0, f64::max);
    a.json("fig5", json!({"max_rel_dev_decay_vs_tau_s": max_dev}));
    Ok(a)
}

fn fig6() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_1529_780")?;
    let mut a = Artifacts::default();
    let ods: [f64; 7] = [20.0, 50.0, 100.0, 200.0, 370.0, 700.0, 1000.0];
    let mut summary = serde_json::Map::new();
    for (panel, pre) in [("a", 10f64.powf(0.25)), ("b", 1.0f64)] {
        let rows: Vec<[f64; 5]> = ods
            .par_iter()
            .map(|&od| {
                let om = pre * (od / 370.0).powf(-0.25);
                let s = base.with_param("od", od)?.with_param("omega", om)?;
                let run = run_correlation(&s)?;
                Ok([od, om, run.rates.r_p, run.metrics.f_csi, run.metrics.r_sb])
            })
            .collect::<Result<_>>()?;
        let mut t = Table::new(&["od", "omega", "r_p", "f_csi", "r_sb"]);
        rows.iter().for_each(|r| t.push_nums(r));
        a.csv(&format!("fig6{panel}_fcsi_vs_od"), &t);
    }
    let s170 = base.with_param("od", 170.0)?;
    let omegas = log_space(0.3, 3.0, 7);
    let rows: Vec<[f64; 4]> = omegas
        .par_iter()
        .map(|&om| {
            let run = run_correlation(&s170.with_param("omega", om)?)?;
            Ok([om, run.rates.r_p, run.metrics.f_csi, run.metrics.r_sb])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["omega", "r_p", "f_csi", "r_sb"]);
    rows.iter().for_each(|r| t.push_nums(r));
    a.csv("fig6c_fcsi_vs_rp", &t);
    let rp: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let f: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    summary.insert("fcsi_vs_rp_slope_od170".into(), json!(log_slope(&rp, &f)));
    let run = run_correlation(&base.with_param("od", 100.0)?)?;
    summary.insert("pairing_od100".into(), json!({
        "r_ps": run.rates.r_p / run.rates.r_s,
        "r_pi": run.rates.r_p / run.rates.r_i,
        "a_s": run.metrics.a_s,
        "a_i": run.metrics.a_i,
    }));
    a.json("fig6", Value::Object(summary));
    Ok(a)
}

fn fig7() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_warm_tu")?;
    let mut a = Artifacts::default();
    let temps = [1e-4, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0];
    for t in [1e-4, 3.0, 300.0] {
        let d = run_spectrum(&base.with_temperature(t))?;
        let mut tab = Table::new(&["omega", "s_paired", "i_paired"]);
        for (k, w) in d.grid.samples.iter().enumerate().step_by(8) {
            tab.push_nums(&[*w, d.s_paired[k], d.i_paired[k]]);
        }
        a.csv(&format!("fig7a_spectra_t{t}"), &tab);
    }
    let mut rows = Vec::new();
    for &t in &temps {
        let r = run_rates(&base.with_temperature(t))?;
        rows.push([t, r.r_p, r.r_sp, r.r_ip, r.r_sp / r.r_s, r.r_ip / r.r_i]);
    }
    let mut tab = Table::new(&["temperature", "r_p", "r_sp", "r_ip", "r_ps", "r_pi"]);
    rows.iter().for_each(|r| tab.push_nums(r));
    a.csv("fig7bc_rates_vs_temperature", &tab);
    let mut tab = Table::new(&["omega", "r_p"]);
    let mut rabi = Vec::new();
    for om in [1.0, 2.0, 5.0, 10.0, 20.0] {
        let s = base.with_param("omega", om)?.with_temperature(300.0);
        let rp = run_rates(&s)?.r_p;
        tab.push_nums(&[om, rp]);
        rabi.push(rp);
    }
    a.csv("fig7d_rp_vs_omega_300k", &tab);
    let cold = run_rates(&base)?;
    let last = rows.last().expect("rows");
    a.json(
        "fig7",
        json!({
            "rp_cold": cold.r_p,
            "rp_t1e-4": rows[0][1],
            "rp_t300": last[1],
            "r_ps_t300": last[4],
            "r_pi_t300": last[5],
        }),
    );
    Ok(a)
}

fn fig8() -> Result<Artifacts> {
    let base = Setup::from_preset("rb87_warm_tu")?;
    let mut a = Artifacts::default();
    let mut summary = serde_json::Map::new();
    let low = base.with_param("od", 0.1)?;
    for t in [1e-4, 300.0] {
        let s = low.with_temperature(t);
        let run = run_correlation(&s)?;
        summary.insert(format!("decay_ns_od0.1_t{t}"), json!(decay_ns_or_nan(&run.si)));
        a.csv(&format!("fig8_trace_od0.1_t{t}"), &trace_table(&run, s.window_ns, s.scheme.gamma31));
    }
    let temps = [1e-4, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0];
    let mut tab = Table::new(&["temperature", "decay_ns"]);
    for &t in &temps {
        let run = run_correlation(&low.with_temperature(t))?;
        tab.push_nums(&[t, decay_ns_or_nan(&run.si)]);
    }
    a.csv("fig8c_decay_vs_temperature", &tab);
    let ods = [0.1, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];
    let mut tab = Table::new(&["od", "decay_ns_t3", "decay_ns_t300"]);
    let mut cols = Vec::new();
    for t in [3.0, 300.0] {
        let mut col = Vec::new();
        for &od in &ods {
            let run = run_correlation(&base.with_param("od", od)?.with_temperature(t))?;
            col.push(decay_ns_or_nan(&run.si));
        }
        match fit_scaling(&ods, &col) {
            Ok((tau0, x)) => summary.insert(format!("fit_t{t}"), json!({"tau0_ns": tau0, "x": x, "inv_x": 1.0 / x})),
            Err(e) => summary.insert(format!("fit_t{t}"), json!({"error": e.to_string()})),
        };
        cols.push(col);
    }
    for (k, &od) in ods.iter().enumerate() {
        tab.push_nums(&[od, cols[0][k], cols[1][k]]);
    }
    a.csv("fig8d_decay_vs_od", &tab);
    let (drive, t) = tu_comparison_drive();
    let s = base.with_drive(drive).with_temperature(t);
    let run = run_correlation(&s)?;
    a.csv("fig8e_idler_trace", &trace_table(&run, s.window_ns, s.scheme.gamma31));
    summary.insert("tu_comparison".into(), correlation_json(&s, &run));
    a.json("fig8", Value::Object(summary));
    Ok(a)
}

/// Forward/backward pair with every propagation phase set to zero.
fn matched_geometries(od: f64) -> Result<(Setup, Setup)> {
    let mut fwd = Setup::from_preset("rb87_1529_780")?.with_param("od", od)?;
    fwd.drive.include_free_phase = false;
    fwd.drive.dk_l = 0.0;
    let mut bwd = fwd.clone();
    bwd.drive.geometry = Geometry::Backward;
    Ok((fwd, bwd))
}

fn fig9() -> Result<Artifacts> {
    let (fwd, bwd) = matched_geometries(10.0)?;
    let (df, db) = (run_spectrum(&fwd)?, run_spectrum(&bwd)?);
    let mut a = Artifacts::default();
    let mut t = Table::new(&["omega", "s_paired", "i_paired", "s_paired_b", "i_paired_b", "s_unpaired_b", "i_unpaired_b"]);
    let mut max_rel: f64 = 0.0;
    let peak = df.s_paired.iter().cloned().fold(0.0, f64::max);
    for k in 0..df.grid.n {
        max_rel = max_rel.max((df.s_paired[k] - db.s_paired[k]).abs() / peak);
        t.push_nums(&[
            df.grid.samples[k],
            df.s_paired[k],
            df.i_paired[k],
            db.s_paired[k],
            db.i_paired[k],
            db.s_unpaired[k],
            db.i_unpaired[k],
        ]);
    }
    a.csv("fig9_spectra_od10", &t);
    let ods = log_space(1.0, 100.0, 9);
    let rows: Vec<[f64; 3]> = ods
        .par_iter()
        .map(|&od| {
            let f = run_correlation(&fwd.with_param("od", od)?)?;
            let b = run_correlation(&bwd.with_param("od", od)?)?;
            Ok([od, decay_ns_or_nan(&f.si), decay_ns_or_nan(&b.si)])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["od", "decay_ns_forward", "decay_ns_backward"]);
    rows.iter().for_each(|r| t.push_nums(r));
    a.csv("fig9_decay_vs_od", &t);
    let max_decay = rows.iter().map(|r| ((r[1] - r[2]) / r[1]).abs()).fold(0.0, f64::max);
    a.json(
        "fig9",
        json!({"max_rel_dev_paired_spectrum": max_rel, "max_rel_dev_decay": max_decay}),
    );
    Ok(a)
}

pub fn cmd_figure(id: &str) -> Result<Artifacts> {
    match id {
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4" => fig4(),
        "fig5" => fig5(),
        "fig6" => fig6(),
        "fig7" => fig7(),
        "fig8" => fig8(),
        "fig9" => fig9(),
        _ => Err(SfwmError::InvalidInput(format!("unknown figure `{id}`; valid: {}", FIGURES.join(", ")))),
    }
}

// ---------------------------------------------------------------------------
// Verify

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value.is_finite() && value <= tolerance }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// ODE oracle and convergence gates.
pub fn verify_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let omegas = [-20.0, -3.0, -0.5, 0.3, 2.0, 15.0];

    let (scheme, drive) = preset("rb87_1529_780")?;
    let drive = drive.with_od(30.0);
    // The GSA matrix is first order in the couplings: each off-diagonal entry
    // is integrated with the opposite coupling switched off.
    let zero = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for &w in &omegas {
        let pc = gsa_parametric(&scheme, &drive, w)?;
        let gsa = transfer(PropagationModel::Gsa, &pc);
        let s_only = ode_reference(&ParametricCoefficients { kappa_i: zero, g_s: zero, ..pc }, 1.0, 1e-11)?;
        let i_only = ode_reference(&ParametricCoefficients { kappa_s: zero, g_s: zero, ..pc }, 1.0, 1e-11)?;
        for (a, b) in [(gsa.a1, s_only.a1), (gsa.b1, s_only.b1), (gsa.c1, i_only.c1), (gsa.d1, s_only.d1)] {
            worst = worst.max((a - b).norm());
        }
    }
    checks.push(Check::new("ode_oracle_gsa", worst, 1e-6));

    let exact = DriveConfig { population_model: PopulationModel::Exact, ..drive.with_rabi(3.0) };
    let steady = solve_steady(&scheme, &exact, None)?;
    let mut worst: f64 = 0.0;
    for &w in &omegas {
        let (pc, _) = exact_parametric(&scheme, &exact, &steady, w)?;
        let ode = ode_reference(&pc, 1.0, 1e-11)?;
        worst = worst.max(transfer(PropagationModel::Exact, &pc).max_abs_diff(&ode));
    }
    checks.push(Check::new("ode_oracle_exact", worst, 1e-6));

    let s = Setup::from_preset("rb87_1529_780")?.with_param("od", 10.0)?;
    let e = s.emitter()?;
    let grid = s.correlation_grid(&e)?;
    let rates = rates_model(e.model())?;
    let (a, _, _) = traces_model(e.model(), &grid, &rates)?;
    let (b, _, _) = traces_model(e.model(), &grid.doubled(), &rates)?;
    checks.push(Check::new("decay_grid_doubling", rel(decay_ns_or_nan(&b), decay_ns_or_nan(&a)), 0.01));

    let spec = FrequencyGrid::new(1 << 20, 2560.0)?;
    let sum: f64 = spec
        .samples
        .par_iter()
        .map(|&w| spectral_point(e.model(), w).map(|p| p.s_paired))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum::<f64>()
        * spec.step()
        / (2.0 * std::f64::consts::PI);
    checks.push(Check::new("pairing_rate_quadrature", rel(rate_to_si(sum, s.scheme.gamma_unit), rates.r_sp), 1e-3));

    let warm = Setup::from_preset("rb87_warm_tu")?;
    let coarse = velocity_grid_resolved(&warm.scheme, &warm.drive, 300.0, PANEL_NODES, PANEL_FACTOR)?;
    let fine = velocity_grid_resolved(&warm.scheme, &warm.drive, 300.0, PANEL_NODES, PANEL_FACTOR / 2.0)?;
    let r1 = rates_model(&WarmSource::new(&warm.scheme, &warm.drive, &coarse)?)?.r_p;
    let r2 = rates_model(&WarmSource::new(&warm.scheme, &warm.drive, &fine)?)?.r_p;
    checks.push(Check::new("velocity_node_doubling_300k", rel(r1, r2), 5e-3));

    let (mf, mb) = matched_geometries(10.0)?;
    let src_f = Source::new(&mf.scheme, &mf.drive)?;
    let src_b = Source::new(&mb.scheme, &mb.drive)?;
    let mut worst: f64 = 0.0;
    for &w in &omegas {
        let f = spectral_point(&src_f, w)?.s_paired;
        let b = spectral_point(&src_b, w)?.s_paired;
        worst = worst.max(rel(b, f));
    }
    checks.push(Check::new("geometry_equivalence_paired", worst, 1e-6));

    let rest = DopplerShift::rest(&s.drive);
    let (p1, _) = coefficients(&s.scheme, &s.drive, &rest, CoefficientModel::Gsa, 0.7)?;
    let p0 = gsa_parametric(&s.scheme, &s.drive, 0.7)?;
    let diff = (p1.kappa_s - p0.kappa_s).norm() + (p1.gamma_i - p0.gamma_i).norm();
    checks.push(Check::new("rest_frame_consistency", diff, 1e-12));

    Ok(checks)
}

pub fn cmd_verify() -> Result<(Artifacts, bool)> {
    let checks = verify_checks()?;
    let ok = checks.iter().all(|c| c.pass);
    let mut t = Table::new(&["check", "value", "tolerance", "pass"]);
    for c in &checks {
        t.push(vec![c.name.clone().into(), c.value.into(), c.tolerance.into(), (if c.pass { "yes" } else { "no" }).into()]);
    }
    let mut a = Artifacts::default();
    a.csv("verify", &t);
    let map: BTreeMap<String, Value> =
        checks.iter().map(|c| (c.name.clone(), json!({"value": c.value, "tolerance": c.tolerance, "pass": c.pass}))).collect();
    a.json("verify", json!({"checks": map, "pass": ok}));
    Ok((a, ok))
}

// ---------------------------------------------------------------------------
// Entry point

/// Configure the global worker pool from the environment.
pub fn init_workers() {
    if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> anyhow::Result<i32> {
    let o = &cli.opts;
    let mut ok = true;
    let artifacts = match &cli.command {
        Command::Spectrum => cmd_spectrum(&Setup::from_opts(o)?)?,
        Command::Rates => cmd_rates(&Setup::from_opts(o)?)?,
        Command::Correlation => cmd_correlation(&Setup::from_opts(o)?)?,
        Command::Metrics => cmd_metrics(&Setup::from_opts(o)?)?,
        Command::Sweep { axis, points, rates_only } => {
            cmd_sweep(&Setup::from_opts(o)?, &SweepAxis::parse(axis)?, *points, *rates_only)?
        }
        Command::Figure { id, figure } => {
            let id = id
                .as_deref()
                .or(figure.as_deref())
                .ok_or_else(|| anyhow::anyhow!("figure id required (one of {})", FIGURES.join(", ")))?;
            cmd_figure(id)?
        }
        Command::Verify => {
            let (a, pass) = cmd_verify()?;
            ok &= pass;
            a
        }
    };
    let mut artifacts = artifacts;
    if o.verify && !matches!(cli.command, Command::Verify) {
        let (a, pass) = cmd_verify()?;
        ok &= pass;
        artifacts.extend(a);
    }
    artifacts.write(&o.out)?;
    for (name, _) in &artifacts.files {
        println!("{}", o.out.join(name).display());
    }
    if !ok {
        eprintln!("verification failed; see verify.json");
    }
    Ok(if ok { 0 } else { 1 })
}
