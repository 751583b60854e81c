//! TOML run configuration.
//!
//! A config has an entry mode (`direct`: couplings given in ω_c units;
//! `physical`: couplings derived from geometry and drives), a `[params]`
//! table whose keys mirror `SystemParams`, and one optional table per
//! command payload. Angles are degrees on disk.

use std::path::Path;
use std::str::FromStr;

use magnocool_core::cooling::DEFAULT_LOG10_BRACKET;
use magnocool_core::model::{eps_from_pump, DeviceGeometry, PhysicalConstants};
use magnocool_core::presets;
use magnocool_core::spectra::{DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN};
use magnocool_core::steady_state::MagnonWeighting;
use magnocool_core::sweep_opt::{FigureId, FreeParam, Objective, Observable, SweepKey, SweepValues};
use magnocool_core::{Mechanism, SystemParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Direct,
    Physical,
}

/// ε_a either as a complex number or as pump amplitude and phase
/// (ε_a = iΛe^{iθ}/2, θ in degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum EpsInput {
    Cartesian { re: f64, im: f64 },
    Pump { lambda: f64, theta: f64 },
}

impl EpsInput {
    pub fn value(self) -> Complex64 {
        match self {
            EpsInput::Cartesian { re, im } => Complex64::new(re, im),
            EpsInput::Pump { lambda, theta } => eps_from_pump(lambda, theta.to_radians()),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub omega_c: Option<f64>,
    pub omega_c_hz: Option<f64>,
    /// Sets both detunings.
    pub delta: Option<f64>,
    pub delta_a: Option<f64>,
    pub delta_m: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_m: Option<f64>,
    pub gamma_c: Option<f64>,
    pub q_c: Option<f64>,
    pub n_m: Option<f64>,
    pub n_c: Option<f64>,
    pub j_ac: Option<f64>,
    pub j_mc: Option<f64>,
    pub j_am: Option<f64>,
    pub eps_a: Option<EpsInput>,
    pub r_s: Option<f64>,
    /// Degrees.
    pub phi_s: Option<f64>,
    pub mechanism: Option<Mechanism>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConstants {
    pub gyromagnetic_ratio: Option<f64>,
    pub vacuum_permeability: Option<f64>,
    pub spin_density: Option<f64>,
    pub ground_spin: Option<f64>,
    pub mass_density: Option<f64>,
    pub reduced_planck: Option<f64>,
    pub boltzmann: Option<f64>,
}

impl RawConstants {
    fn resolve(&self) -> PhysicalConstants {
        let d = PhysicalConstants::default();
        PhysicalConstants {
            gyromagnetic_ratio: self.gyromagnetic_ratio.unwrap_or(d.gyromagnetic_ratio),
            vacuum_permeability: self.vacuum_permeability.unwrap_or(d.vacuum_permeability),
            spin_density: self.spin_density.unwrap_or(d.spin_density),
            ground_spin: self.ground_spin.unwrap_or(d.ground_spin),
            mass_density: self.mass_density.unwrap_or(d.mass_density),
            reduced_planck: self.reduced_planck.unwrap_or(d.reduced_planck),
            boltzmann: self.boltzmann.unwrap_or(d.boltzmann),
        }
    }
}

/// Geometry plus the two optical frequencies needed by the drive formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSetup {
    pub diameter: f64,
    pub cavity_volume: f64,
    pub wave_number: f64,
    pub equilibrium_position: f64,
    pub trap_frequency: f64,
    pub bias_field: f64,
    #[serde(default)]
    pub magnon_drive_field: f64,
    #[serde(default)]
    pub drive_power: f64,
    /// Cavity frequency ω_a in rad/s.
    pub cavity_frequency: f64,
    /// Drive frequency ω_d in rad/s; defaults to ω_a (resonant drive).
    pub drive_frequency: Option<f64>,
}

impl PhysicalSetup {
    pub fn geometry(&self) -> DeviceGeometry {
        DeviceGeometry {
            diameter: self.diameter,
            cavity_volume: self.cavity_volume,
            wave_number: self.wave_number,
            equilibrium_position: self.equilibrium_position,
            trap_frequency: self.trap_frequency,
            bias_field: self.bias_field,
            magnon_drive_field: self.magnon_drive_field,
            drive_power: self.drive_power,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_min")]
    pub min: f64,
    #[serde(default = "default_max")]
    pub max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub weighting: MagnonWeighting,
}

fn default_min() -> f64 {
    DEFAULT_GRID_SPAN.0
}
fn default_max() -> f64 {
    DEFAULT_GRID_SPAN.1
}
fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            min: default_min(),
            max: default_max(),
            points: default_points(),
            weighting: MagnonWeighting::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub key: String,
    pub values: SweepValues,
    pub observables: Option<Vec<Observable>>,
    pub spectrum: Option<SpectrumSection>,
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    #[serde(default)]
    pub free: Vec<String>,
    pub objective: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsMethod {
    #[default]
    RateEquation,
    Lyapunov,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(default)]
    pub method: DynamicsMethod,
    /// Initial CM occupancy; defaults to the bath occupancy.
    pub n0: Option<f64>,
    /// Sample times in seconds.
    pub times_s: Option<SweepValues>,
    /// Sample times in units of 1/ω_c.
    pub times: Option<SweepValues>,
    /// Occupancy level whose first crossing is reported.
    #[serde(default = "one")]
    pub level: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            method: DynamicsMethod::default(),
            n0: None,
            times_s: Some(SweepValues::range(1e-7, 1.0, 401, magnocool_core::sweep_opt::Scale::Log)),
            times: None,
            level: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    #[serde(default = "default_bracket")]
    pub bracket: (f64, f64),
}

fn default_bracket() -> (f64, f64) {
    DEFAULT_LOG10_BRACKET
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            bracket: default_bracket(),
        }
    }
}

/// Drives for the `steady` command in direct mode, in units of ω_c.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    #[serde(default)]
    pub omega_a: f64,
    #[serde(default)]
    pub eps_m: f64,
    #[serde(default)]
    pub g_amc: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupancySection {
    pub gamma_minus: Option<f64>,
    pub gamma_plus: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSection {
    pub id: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub mode: Mode,
    pub preset: Option<String>,
    #[serde(default)]
    pub params: RawParams,
    pub constants: Option<RawConstants>,
    pub geometry: Option<PhysicalSetup>,
    pub spectrum: Option<SpectrumSection>,
    pub sweep: Option<SweepSection>,
    pub optimize: Option<OptimizeSection>,
    pub dynamics: Option<DynamicsSection>,
    pub threshold: Option<ThresholdSection>,
    pub steady: Option<SteadySection>,
    pub occupancy: Option<OccupancySection>,
    pub figure: Option<FigureSection>,
    pub output: Option<OutputSection>,
}

/// Named starting points for `[params]`.
pub const PRESETS: &[&str] = &[
    "fig2_cmi",
    "fig2_mcm",
    "fig2_blue_cmi",
    "fig2_blue_mcm",
    "fig4a_cmi",
    "fig4a_mcm",
    "fig5",
    "fig6_cmi",
    "fig6_mcm",
];

pub fn preset(name: &str) -> Result<SystemParams, CliError> {
    Ok(match name {
        "fig2_cmi" => presets::fig2_cmi(),
        "fig2_mcm" => presets::fig2_mcm(),
        "fig2_blue_cmi" => presets::fig2_blue(Mechanism::Cmi),
        "fig2_blue_mcm" => presets::fig2_blue(Mechanism::Mcm),
        "fig4a_cmi" => presets::fig4a(Mechanism::Cmi, 1e11),
        "fig4a_mcm" => presets::fig4a(Mechanism::Mcm, 1e11),
        "fig5" => presets::fig5(),
        "fig6_cmi" => presets::fig6(Mechanism::Cmi),
        "fig6_mcm" => presets::fig6(Mechanism::Mcm),
        _ => {
            return Err(CliError::Config(format!(
                "unknown preset '{name}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    })
}

/// Reads a config file into a TOML table. A missing path yields an empty
/// table.
pub fn load_table(path: Option<&Path>) -> Result<Table, CliError> {
    let Some(path) = path else {
        return Ok(Table::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<Table>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Applies `key=value` overrides. Dotted keys address nested tables; a
/// bare key goes to `[params]`. The value is parsed as a TOML value and
/// falls back to a string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{assignment}'")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("--set has an empty key in '{assignment}'")));
    }
    let value = parse_value(raw.trim());
    let mut path: Vec<&str> = key.split('.').collect();
    if path.len() == 1 && !TOP_LEVEL.contains(&path[0]) {
        path.insert(0, "params");
    }
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cursor = table;
    for p in parents {
        let entry = cursor
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cursor = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::Config(format!("--set {key}: '{p}' is not a table"))),
        };
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

const TOP_LEVEL: &[&str] = &["mode", "preset"];

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn parse(table: &Table) -> Result<RawConfig, CliError> {
    RawConfig::deserialize(Value::Table(table.clone()))
        .map_err(|e| CliError::Config(e.to_string()))
}

fn require(name: &str, v: Option<f64>, base: Option<f64>) -> Result<f64, CliError> {
    v.or(base)
        .ok_or_else(|| CliError::Config(format!("missing parameter '{name}' (no preset supplies it)")))
}

impl RawConfig {
    /// Resolves `[params]` on top of the preset. Physical mode leaves the
    /// couplings at zero; they are filled in by [`crate::physical`].
    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        self.check_mode()?;
        let base = self.preset.as_deref().map(preset).transpose()?;
        let p = &self.params;
        let b = |f: fn(&SystemParams) -> f64| base.as_ref().map(f);

        let omega_c = match (p.omega_c, p.omega_c_hz, &self.geometry) {
            (Some(_), Some(_), _) => {
                return Err(CliError::Config("give either omega_c or omega_c_hz, not both".into()))
            }
            (Some(w), None, _) => w,
            (None, Some(hz), _) => hz * std::f64::consts::TAU,
            (None, None, Some(g)) if self.mode == Mode::Physical => g.trap_frequency,
            (None, None, _) => require("omega_c", None, b(|s| s.omega_c))?,
        };
        if p.delta.is_some() && (p.delta_a.is_some() || p.delta_m.is_some()) {
            return Err(CliError::Config("'delta' sets both detunings; do not combine it with delta_a/delta_m".into()));
        }
        let gamma_c = match (p.gamma_c, p.q_c) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either gamma_c or q_c, not both".into()))
            }
            (Some(g), None) => g,
            (None, Some(q)) => {
                if !(q > 0.0) {
                    return Err(CliError::Config(format!("q_c = {q} must be positive")));
                }
                1.0 / q
            }
            (None, None) => require("gamma_c", None, b(|s| s.gamma_c))?,
        };
        let physical = self.mode == Mode::Physical;
        let coupling = |name: &str, v: Option<f64>, f: fn(&SystemParams) -> f64| {
            if physical {
                Ok(0.0)
            } else {
                require(name, v, b(f))
            }
        };
        let params = SystemParams {
            omega_c,
            delta_a: require("delta_a", p.delta.or(p.delta_a), b(|s| s.delta_a))?,
            delta_m: require("delta_m", p.delta.or(p.delta_m), b(|s| s.delta_m))?,
            gamma_a: require("gamma_a", p.gamma_a, b(|s| s.gamma_a))?,
            gamma_m: require("gamma_m", p.gamma_m, b(|s| s.gamma_m))?,
            gamma_c,
            n_m: require("n_m", p.n_m, b(|s| s.n_m))?,
            n_c: require("n_c", p.n_c, b(|s| s.n_c))?,
            j_ac: coupling("j_ac", p.j_ac, |s| s.j_ac)?,
            j_mc: coupling("j_mc", p.j_mc, |s| s.j_mc)?,
            j_am: if physical {
                0.0
            } else {
                p.j_am.or(b(|s| s.j_am)).unwrap_or(0.0)
            },
            eps_a: p
                .eps_a
                .map(EpsInput::value)
                .or(base.map(|s| s.eps_a))
                .unwrap_or_default(),
            r_s: p.r_s.or(b(|s| s.r_s)).unwrap_or(0.0),
            phi_s: p.phi_s.map(f64::to_radians).or(b(|s| s.phi_s)).unwrap_or(0.0),
            mechanism: p
                .mechanism
                .or(base.map(|s| s.mechanism))
                .ok_or_else(|| CliError::Config("missing parameter 'mechanism' (mcm or cmi)".into()))?,
        };
        params.validate()?;
        Ok(params)
    }

    fn check_mode(&self) -> Result<(), CliError> {
        match self.mode {
            Mode::Direct => {
                if self.geometry.is_some() || self.constants.is_some() {
                    return Err(CliError::Config(
                        "direct mode forbids [geometry] and [constants]; set mode = \"physical\"".into(),
                    ));
                }
            }
            Mode::Physical => {
                if self.geometry.is_none() {
                    return Err(CliError::Config("physical mode requires a [geometry] table".into()));
                }
                let p = &self.params;
                for (name, v) in [("j_ac", p.j_ac), ("j_mc", p.j_mc), ("j_am", p.j_am)] {
                    if let Some(v) = v {
                        return Err(CliError::Config(format!(
                            "physical mode derives {name}; remove '{name} = {v}' from [params]"
                        )));
                    }
                }
                if p.omega_c.is_some() || p.omega_c_hz.is_some() {
                    return Err(CliError::Config(
                        "physical mode takes omega_c from geometry.trap_frequency".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants.as_ref().map(RawConstants::resolve).unwrap_or_default()
    }
}

pub fn parse_sweep_key(s: &str) -> Result<SweepKey, CliError> {
    SweepKey::from_str(s).map_err(CliError::from)
}

pub fn parse_figure(s: &str) -> Result<FigureId, CliError> {
    FigureId::from_str(s).map_err(CliError::from)
}

pub fn parse_free(names: &[String]) -> Result<Vec<FreeParam>, CliError> {
    names
        .iter()
        .map(|n| FreeParam::from_str(n).map_err(CliError::from))
        .collect()
}

pub fn parse_objective(s: Option<&str>) -> Result<Objective, CliError> {
    s.map(|s| Objective::from_str(s).map_err(CliError::from))
        .transpose()
        .map(Option::unwrap_or_default)
}
