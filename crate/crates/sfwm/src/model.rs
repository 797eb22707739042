//! Units, level schemes, drive configurations and named presets.
//!
//! All rates and frequencies are in units of Γ, times in 1/Γ, and the medium
//! length is normalized to one for every per-length coefficient.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SfwmError};

/// Γ = 2π × 6 MHz in rad/s.
pub const GAMMA_UNIT: f64 = 2.0 * std::f64::consts::PI * 6.0e6;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic masses in kg (external physical constants).
pub const MASS_RB87: f64 = 1.4432e-25;
pub const MASS_RB85: f64 = 1.4100e-25;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

pub const PRESET_NAMES: [&str; 4] = [
    "rb87_1529_780",
    "rb87_1367_780",
    "rb85_776_780_chaneliere",
    "rb87_warm_tu",
];

/// Convert a time in 1/Γ units to nanoseconds.
pub fn time_to_ns(t: f64, gamma_unit: f64) -> f64 {
    t / gamma_unit * 1e9
}

/// Convert a rate in Γ units to s⁻¹.
pub fn rate_to_si(r: f64, gamma_unit: f64) -> f64 {
    r * gamma_unit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub name: String,
    pub gamma21: f64,
    pub gamma31: f64,
    pub gamma42: f64,
    pub gamma43: f64,
    pub cg2_21: f64,
    pub cg2_31: f64,
    pub cg2_42: f64,
    pub cg2_43: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub s_lambda: f64,
    pub mass: f64,
    pub gamma_unit: f64,
    /// Wavelength of the |1⟩→|2⟩ pump (coupling field).
    pub lambda_c: f64,
    /// Wavelength of the |2⟩→|4⟩ pump (driving field).
    pub lambda_d: f64,
    /// Use k_c + k_d = k_s + k_i instead of the pump wavelengths.
    #[serde(default)]
    pub phase_matched_pumps: bool,
    /// Drop the squared Clebsch–Gordan factors from the field couplings.
    #[serde(default)]
    pub bare_coupling: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoherence {
    pub g21: f64,
    pub g31: f64,
    pub g32: f64,
    pub g41: f64,
    pub g42: f64,
    pub g43: f64,
}

impl LevelScheme {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        gammas: [f64; 4],
        cg2: [f64; 4],
        lambda_s: f64,
        lambda_i: f64,
        mass: f64,
        lambda_c: f64,
        lambda_d: f64,
    ) -> Self {
        LevelScheme {
            name: name.to_string(),
            gamma21: gammas[0],
            gamma31: gammas[1],
            gamma42: gammas[2],
            gamma43: gammas[3],
            cg2_21: cg2[0],
            cg2_31: cg2[1],
            cg2_42: cg2[2],
            cg2_43: cg2[3],
            lambda_s,
            lambda_i,
            s_lambda: (lambda_s / lambda_i).powi(2),
            mass,
            gamma_unit: GAMMA_UNIT,
            lambda_c,
            lambda_d,
            phase_matched_pumps: false,
            bare_coupling: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.gamma21, self.gamma31, self.gamma42, self.gamma43];
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(SfwmError::InvalidInput("decay rates must be finite and >= 0".into()));
        }
        if self.gamma31 <= 0.0 {
            return Err(SfwmError::InvalidInput("gamma31 must be > 0".into()));
        }
        if self.lambda_s <= 0.0 || self.lambda_i <= 0.0 {
            return Err(SfwmError::InvalidInput("wavelengths must be > 0".into()));
        }
        let s = (self.lambda_s / self.lambda_i).powi(2);
        if (s - self.s_lambda).abs() > 4.0 * f64::EPSILON * s {
            return Err(SfwmError::InvalidInput(format!(
                "s_lambda {} inconsistent with wavelengths ({})",
                self.s_lambda, s
            )));
        }
        if self.gamma_unit <= 0.0 || self.mass <= 0.0 {
            return Err(SfwmError::InvalidInput("gamma_unit and mass must be > 0".into()));
        }
        Ok(())
    }

    pub fn decoherence(&self) -> Decoherence {
        Decoherence {
            g21: self.gamma21,
            g31: self.gamma31,
            g32: self.gamma31 + self.gamma21,
            g41: self.gamma42 + self.gamma43,
            g42: self.gamma42 + self.gamma43 + self.gamma21,
            g43: self.gamma42 + self.gamma43 + self.gamma31,
        }
    }

    /// Γ43 as it enters the signal-field coupling strength.
    pub fn coupling43(&self) -> f64 {
        if self.bare_coupling {
            self.gamma43
        } else {
            self.gamma43 * self.cg2_43
        }
    }

    /// Γ31 as it enters the idler-field coupling strength.
    pub fn coupling31(&self) -> f64 {
        if self.bare_coupling {
            self.gamma31
        } else {
            self.gamma31 * self.cg2_31
        }
    }

    fn wavenumber(&self, lambda: f64) -> f64 {
        2.0 * std::f64::consts::PI / lambda
    }

    pub fn k_i(&self) -> f64 {
        self.wavenumber(self.lambda_i)
    }

    pub fn k_s(&self) -> f64 {
        self.wavenumber(self.lambda_s)
    }

    /// Pump wave numbers (k_c, k_d) in rad/m.
    pub fn pump_wavenumbers(&self) -> (f64, f64) {
        if self.phase_matched_pumps {
            let total = self.k_s() + self.k_i();
            let kc = self.wavenumber(self.lambda_c);
            (kc, total - kc)
        } else {
            (self.wavenumber(self.lambda_c), self.wavenumber(self.lambda_d))
        }
    }
}

/// All six decoherence rates keyed by transition label.
pub fn decoherence_table(scheme: &LevelScheme) -> BTreeMap<String, f64> {
    let d = scheme.decoherence();
    [
        ("21", d.g21),
        ("31", d.g31),
        ("32", d.g32),
        ("41", d.g41),
        ("42", d.g42),
        ("43", d.g43),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    #[default]
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PopulationModel {
    #[default]
    Gsa,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub omega_c: Complex64,
    pub omega_d: Complex64,
    pub delta1: f64,
    pub delta2: f64,
    pub od: f64,
    pub dk_l: f64,
    pub geometry: Geometry,
    pub population_model: PopulationModel,
    /// Medium length in meters, only used by the free-propagation phase.
    pub length: f64,
    pub include_free_phase: bool,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            omega_c: Complex64::new(1.0, 0.0),
            omega_d: Complex64::new(1.0, 0.0),
            delta1: -50.0,
            delta2: 0.0,
            od: 10.0,
            dk_l: 0.0,
            geometry: Geometry::Forward,
            population_model: PopulationModel::Gsa,
            length: 0.01,
            include_free_phase: true,
        }
    }
}

impl DriveConfig {
    /// Hard validation; returns soft warnings on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.od >= 0.0) || !self.od.is_finite() {
            return Err(SfwmError::InvalidInput("od must be finite and >= 0".into()));
        }
        if !(self.length > 0.0) {
            return Err(SfwmError::InvalidInput("length must be > 0".into()));
        }
        let finite = [
            self.omega_c.re,
            self.omega_c.im,
            self.omega_d.re,
            self.omega_d.im,
            self.delta1,
            self.delta2,
            self.dk_l,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(SfwmError::InvalidInput("drive parameters must be finite".into()));
        }
        let mut warnings = Vec::new();
        if !self.gsa_valid() {
            warnings.push(format!(
                "GSA validity: |Ωc|={:.3}, |Ωd|={:.3} exceed |Δ1|/5={:.3}",
                self.omega_c.norm(),
                self.omega_d.norm(),
                self.delta1.abs() / 5.0
            ));
        }
        Ok(warnings)
    }

    pub fn gsa_valid(&self) -> bool {
        let lim = self.delta1.abs() / 5.0;
        self.omega_c.norm() <= lim && self.omega_d.norm() <= lim
    }

    /// Free-propagation phase ωL/c (dimensionless) for ω in Γ units.
    pub fn free_phase(&self, omega: f64, gamma_unit: f64) -> f64 {
        if self.include_free_phase {
            omega * gamma_unit * self.length / SPEED_OF_LIGHT
        } else {
            0.0
        }
    }

    pub fn with_od(&self, od: f64) -> Self {
        DriveConfig { od, ..self.clone() }
    }

    pub fn with_rabi(&self, omega: f64) -> Self {
        DriveConfig {
            omega_c: Complex64::new(omega, 0.0),
            omega_d: Complex64::new(omega, 0.0),
            ..self.clone()
        }
    }
}

/// Uniform midpoint-staggered frequency grid; ω = 0 is never sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n: usize,
    pub half_width: f64,
    pub samples: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(SfwmError::InvalidInput(format!("grid size {n} must be a power of two >= 2")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(SfwmError::InvalidInput("grid half width must be > 0".into()));
        }
        let dw = 2.0 * half_width / n as f64;
        let samples = (0..n).map(|k| -half_width + dw * (k as f64 + 0.5)).collect();
        Ok(FrequencyGrid { n, half_width, samples })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Spectral display grid: W = max(40, 4√α) with 2¹⁶ points.
    pub fn for_spectrum(alpha: f64) -> Self {
        let w = 40f64.max(4.0 * alpha.max(0.0).sqrt());
        FrequencyGrid::new(1 << 16, w).expect("valid default grid")
    }

    /// Correlation grid resolving τ down to a small fraction of 4/α and
    /// spanning several single-atom lifetimes.
    pub fn for_correlation(alpha: f64) -> Self {
        let w = 200f64.max(25.0 * alpha.max(0.0));
        let target_step = 0.05;
        let n = ((2.0 * w / target_step).ceil() as usize).next_power_of_two().clamp(1 << 12, 1 << 21);
        FrequencyGrid::new(n, w).expect("valid default grid")
    }

    pub fn doubled(&self) -> Self {
        FrequencyGrid::new(self.n * 4, self.half_width * 2.0).expect("valid doubled grid")
    }
}

fn rb87_d1_pumps() -> (f64, f64) {
    (795e-9, 1476e-9)
}

/// Named level scheme and default drive.
pub fn preset(name: &str) -> Result<(LevelScheme, DriveConfig)> {
    let (kc87, kd87) = rb87_d1_pumps();
    let base = DriveConfig::default();
    match name {
        "rb87_1529_780" => Ok((
            LevelScheme::new(
                name,
                [0.95, 1.00, 0.30, 0.05],
                [0.5, 1.0, 0.5, 0.2],
                1529e-9,
                780e-9,
                MASS_RB87,
                kc87,
                kd87,
            ),
            base,
        )),
        "rb87_1367_780" => Ok((
            LevelScheme::new(
                name,
                [0.95, 1.00, 0.17, 0.33],
                [0.5, 1.0, 0.5, 0.5],
                1367e-9,
                780e-9,
                MASS_RB87,
                kc87,
                kd87,
            ),
            base,
        )),
        "rb85_776_780_chaneliere" => Ok((
            LevelScheme::new(
                name,
                [1.00, 1.00, 0.28, 0.28],
                [1.0 / 28.0, 1.0, 28.0 / 45.0, 1.0 / 45.0],
                776e-9,
                780e-9,
                MASS_RB85,
                780e-9,
                776e-9,
            ),
            DriveConfig { od: 25.0, geometry: Geometry::Backward, ..base },
        )),
        "rb87_warm_tu" => Ok((
            LevelScheme::new(
                name,
                [0.95, 1.00, 0.30, 0.05],
                [1.0 / 6.0, 1.0, 2.0 / 3.0, 0.2],
                1529e-9,
                780e-9,
                MASS_RB87,
                kc87,
                kd87,
            ),
            DriveConfig {
                omega_c: Complex64::new(5.0, 0.0),
                omega_d: Complex64::new(5.0, 0.0),
                delta1: -500.0,
                od: 1000.0,
                ..base
            },
        )),
        _ => Err(SfwmError::UnknownPreset {
            name: name.to_string(),
            valid: PRESET_NAMES.join(", "),
        }),
    }
}

/// Drive of the warm comparison run (OD 420, Ωc 17.1Γ, Ωd 78.7Γ, Δ1 353Γ, 328 K).
pub fn tu_comparison_drive() -> (DriveConfig, f64) {
    let (_, base) = preset("rb87_warm_tu").expect("preset exists");
    (
        DriveConfig {
            omega_c: Complex64::new(17.1, 0.0),
            omega_d: Complex64::new(78.7, 0.0),
            delta1: 353.0,
            od: 420.0,
            population_model: PopulationModel::Exact,
            ..base
        },
        328.0,
    )
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeOverride {
    pub gamma21: Option<f64>,
    pub gamma31: Option<f64>,
    pub gamma42: Option<f64>,
    pub gamma43: Option<f64>,
    pub cg2_43: Option<f64>,
    pub cg2_31: Option<f64>,
    pub lambda_s: Option<f64>,
    pub lambda_i: Option<f64>,
    pub phase_matched_pumps: Option<bool>,
    pub bare_coupling: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveOverride {
    pub omega_c: Option<f64>,
    pub omega_d: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub od: Option<f64>,
    pub dk_l: Option<f64>,
    pub geometry: Option<Geometry>,
    pub population_model: Option<PopulationModel>,
    pub length: Option<f64>,
    pub include_free_phase: Option<bool>,
}

/// Structured configuration file.
///
/// ```toml
/// schema_version = 1
/// preset = "rb87_1529_780"
/// temperature = 300.0        # optional, enables velocity averaging
///
/// [scheme]
/// gamma43 = 0.05
///
/// [drive]
/// od = 100.0
/// omega_c = 1.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub preset: String,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub scheme: SchemeOverride,
    #[serde(default)]
    pub drive: DriveOverride,
}

impl RunConfig {
    pub fn from_preset(name: &str) -> Self {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            preset: name.to_string(),
            temperature: None,
            scheme: SchemeOverride::default(),
            drive: DriveOverride::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let loc = e
                .span()
                .map(|s| {
                    let (line, col) = line_col(text, s.start);
                    format!(" at line {line}, column {col}")
                })
                .unwrap_or_default();
            SfwmError::Config(format!("{}{}", e.message(), loc))
        })?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(SfwmError::Config(format!(
                "unsupported schema_version {} (expected {})",
                cfg.schema_version, CONFIG_SCHEMA_VERSION
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SfwmError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Resolve the preset and apply overrides.
    pub fn resolve(&self) -> Result<(LevelScheme, DriveConfig)> {
        let (mut s, mut d) = preset(&self.preset)?;
        let o = &self.scheme;
        if let Some(v) = o.gamma21 {
            s.gamma21 = v;
        }
        if let Some(v) = o.gamma31 {
            s.gamma31 = v;
        }
        if let Some(v) = o.gamma42 {
            s.gamma42 = v;
        }
        if let Some(v) = o.gamma43 {
            s.gamma43 = v;
        }
        if let Some(v) = o.cg2_43 {
            s.cg2_43 = v;
        }
        if let Some(v) = o.cg2_31 {
            s.cg2_31 = v;
        }
        if let Some(v) = o.lambda_s {
            s.lambda_s = v;
        }
        if let Some(v) = o.lambda_i {
            s.lambda_i = v;
        }
        if let Some(v) = o.phase_matched_pumps {
            s.phase_matched_pumps = v;
        }
        if let Some(v) = o.bare_coupling {
            s.bare_coupling = v;
        }
        s.s_lambda = (s.lambda_s / s.lambda_i).powi(2);
        let o = &self.drive;
        if let Some(v) = o.omega_c {
            d.omega_c = Complex64::new(v, 0.0);
        }
        if let Some(v) = o.omega_d {
            d.omega_d = Complex64::new(v, 0.0);
        }
        if let Some(v) = o.delta1 {
            d.delta1 = v;
        }
        if let Some(v) = o.delta2 {
            d.delta2 = v;
        }
        if let Some(v) = o.od {
            d.od = v;
        }
        if let Some(v) = o.dk_l {
            d.dk_l = v;
        }
        if let Some(v) = o.geometry {
            d.geometry = v;
        }
        if let Some(v) = o.population_model {
            d.population_model = v;
        }
        if let Some(v) = o.length {
            d.length = v;
        }
        if let Some(v) = o.include_free_phase {
            d.include_free_phase = v;
        }
        s.validate()?;
        d.validate()?;
        Ok((s, d))
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in PRESET_NAMES {
            let (s, d) = preset(name).unwrap();
            s.validate().unwrap();
            d.validate().unwrap();
        }
    }

    #[test]
    fn grid_is_staggered() {
        let g = FrequencyGrid::new(8, 4.0).unwrap();
        assert!(g.samples.iter().all(|w| *w != 0.0));
        assert!((g.samples[0] + g.samples[7]).abs() < 1e-15);
        assert!((g.step() - 1.0).abs() < 1e-15);
    }
}
