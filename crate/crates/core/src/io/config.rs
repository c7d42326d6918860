//! TOML run configuration with dotted-key overrides.
//!
//! ```toml
//! dimension = 1
//! n = 512
//! L = 24.0
//! mu = -1
//! preset = "perturbed_soliton"   # gaussian | soliton | boosted_soliton |
//!                                # perturbed_soliton | scaled_soliton | file:PATH
//! sample_times = [0.0, 1.0, 2.0]
//!
//! [preset_params]
//! seed = 7
//! perturbation = 0.01
//!
//! [evolution]
//! t_end = 2.0
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evolve::EvolutionConfig;
use crate::field::Grid;
use crate::ground_state::default_tolerance;

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Gaussian,
    Soliton,
    BoostedSoliton,
    PerturbedSoliton,
    ScaledSoliton,
    File(PathBuf),
}

impl Preset {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => Preset::Gaussian,
            "soliton" => Preset::Soliton,
            "boosted_soliton" => Preset::BoostedSoliton,
            "perturbed_soliton" => Preset::PerturbedSoliton,
            "scaled_soliton" => Preset::ScaledSoliton,
            other => match other.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Preset::File(PathBuf::from(p)),
                _ => return Err(Error::Config(format!("preset: unknown preset {other:?}"))),
            },
        })
    }

    /// Whether the preset is built from the ground state.
    pub fn needs_ground_state(&self) -> bool {
        matches!(
            self,
            Preset::Soliton | Preset::BoostedSoliton | Preset::PerturbedSoliton | Preset::ScaledSoliton
        )
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PresetParams {
    /// Gaussian peak amplitude.
    pub amplitude: f64,
    /// Gaussian width `σ` in `e^{-|x|²/(2σ²)}`.
    pub width: f64,
    /// Phase gradient `e^{ix·boost}`; empty means zero.
    pub boost: Vec<f64>,
    pub seed: u64,
    /// L² size of the perturbation before renormalization.
    pub perturbation: f64,
    /// Amplitude factor of `scaled_soliton`.
    pub scale: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self { amplitude: 1.0, width: 1.0, boost: Vec::new(), seed: 0, perturbation: 1e-2, scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub dt0: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub blowup_gradient_factor: f64,
    pub record_stride: usize,
    pub rate_constant: f64,
    pub nyquist_fraction: f64,
    pub keep_snapshots: bool,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        Self {
            dt0: e.dt0,
            t_end: e.t_end,
            cfl_safety: e.cfl_safety,
            blowup_gradient_factor: e.blowup_gradient_factor,
            record_stride: e.record_stride,
            rate_constant: e.rate_constant,
            nyquist_fraction: e.nyquist_fraction,
            keep_snapshots: e.keep_snapshots,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStateSection {
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Group,
    Galilean,
    Pseudoconformal,
}

/// Parameters of the `transform` subcommand.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformSection {
    pub kind: TransformKind,
    pub lambda: f64,
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
    pub gamma: f64,
    /// Time argument of the Galilean and pseudoconformal maps.
    pub t: f64,
}

impl Default for TransformSection {
    fn default() -> Self {
        Self { kind: TransformKind::Group, lambda: 1.0, x0: Vec::new(), xi0: Vec::new(), gamma: 0.0, t: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimension: usize,
    n: usize,
    #[serde(rename = "L")]
    half_width: f64,
    mu: f64,
    preset: String,
    #[serde(default)]
    sample_times: Vec<f64>,
    morawetz_radius: Option<f64>,
    cutoff: Option<f64>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    preset_params: PresetParams,
    #[serde(default)]
    evolution: EvolutionSection,
    #[serde(default)]
    ground_state: GroundStateSection,
    #[serde(default)]
    transform: TransformSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub mu: f64,
    pub preset: Preset,
    pub params: PresetParams,
    pub evolution: EvolutionConfig,
    pub ground_state_tol: f64,
    pub morawetz_radius: Option<f64>,
    pub cutoff: Option<f64>,
    pub sample_times: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub transform: TransformSection,
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// Parses `text` after applying `key.path=value` overrides; values are
/// read as TOML and fall back to plain strings.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let raw = RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| Error::Config(e.message().to_string()))?;
    validate(raw)
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
    let key = key.trim();
    let value = value.trim();
    let parsed = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").expect("key v was just parsed"),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key {key:?} is malformed")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key}: {p} is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let bad = |key: &str, msg: String| Error::Config(format!("{key}: {msg}"));
    let grid = Grid::new(raw.dimension, raw.n, raw.half_width).map_err(|e| bad("dimension/n/L", e.to_string()))?;
    let d = raw.dimension;
    if raw.mu != 1.0 && raw.mu != -1.0 {
        return Err(bad("mu", format!("must be -1 or +1, got {}", raw.mu)));
    }
    let preset = Preset::parse(&raw.preset)?;
    if let Preset::File(p) = &preset {
        if !p.is_file() {
            return Err(bad("preset", format!("snapshot file {} does not exist", p.display())));
        }
    }
    let pp = &raw.preset_params;
    if !(pp.amplitude.is_finite() && pp.amplitude > 0.0) {
        return Err(bad("preset_params.amplitude", format!("must be positive, got {}", pp.amplitude)));
    }
    if !(pp.width.is_finite() && pp.width > 0.0) {
        return Err(bad("preset_params.width", format!("must be positive, got {}", pp.width)));
    }
    if !pp.boost.is_empty() && pp.boost.len() != d {
        return Err(bad("preset_params.boost", format!("needs {d} components, got {}", pp.boost.len())));
    }
    if pp.boost.iter().any(|b| !b.is_finite()) {
        return Err(bad("preset_params.boost", "must be finite".into()));
    }
    if !(pp.perturbation.is_finite() && pp.perturbation >= 0.0) {
        return Err(bad("preset_params.perturbation", format!("must be nonnegative, got {}", pp.perturbation)));
    }
    if !(pp.scale.is_finite() && pp.scale > 0.0) {
        return Err(bad("preset_params.scale", format!("must be positive, got {}", pp.scale)));
    }
    let e = &raw.evolution;
    let evolution = EvolutionConfig {
        mu: raw.mu,
        dt0: e.dt0,
        t_end: e.t_end,
        cfl_safety: e.cfl_safety,
        blowup_gradient_factor: e.blowup_gradient_factor,
        record_stride: e.record_stride,
        rate_constant: e.rate_constant,
        nyquist_fraction: e.nyquist_fraction,
        keep_snapshots: e.keep_snapshots,
    };
    evolution.validate()?;
    let tol = raw.ground_state.tol.unwrap_or_else(|| default_tolerance(d));
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(bad("ground_state.tol", format!("must lie in (0, 1e-4], got {tol}")));
    }
    if let Some(r) = raw.morawetz_radius {
        let h = grid.spacing();
        if !(r >= 4.0 * h && 8.0 * r <= raw.half_width) {
            return Err(bad("morawetz_radius", format!("must lie in [4h, L/8] = [{}, {}], got {r}", 4.0 * h, raw.half_width / 8.0)));
        }
    }
    if let Some(c) = raw.cutoff {
        if !(c.is_finite() && c > 0.0) {
            return Err(bad("cutoff", format!("must be positive, got {c}")));
        }
    }
    if raw.sample_times.iter().any(|t| !t.is_finite()) {
        return Err(bad("sample_times", "must be finite".into()));
    }
    if raw.sample_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("sample_times", "must be strictly increasing".into()));
    }
    let tr = &raw.transform;
    if !tr.x0.is_empty() && tr.x0.len() != d || !tr.xi0.is_empty() && tr.xi0.len() != d {
        return Err(bad("transform", format!("x0 and xi0 need {d} components")));
    }
    if !(tr.lambda > 0.0 && tr.lambda.is_finite()) {
        return Err(bad("transform.lambda", format!("must be positive, got {}", tr.lambda)));
    }
    Ok(RunConfig {
        grid,
        mu: raw.mu,
        preset,
        params: raw.preset_params,
        evolution,
        ground_state_tol: tol,
        morawetz_radius: raw.morawetz_radius,
        cutoff: raw.cutoff,
        sample_times: raw.sample_times,
        output_dir: raw.output_dir,
        transform: raw.transform,
    })
}

impl TransformSection {
    /// Translation padded with zeros to `dim` entries.
    pub fn x0_or_zero(&self, dim: usize) -> Vec<f64> {
        if self.x0.is_empty() { vec![0.0; dim] } else { self.x0.clone() }
    }

    pub fn xi0_or_zero(&self, dim: usize) -> Vec<f64> {
        if self.xi0.is_empty() { vec![0.0; dim] } else { self.xi0.clone() }
    }
}

impl PresetParams {
    pub fn boost_or_zero(&self, dim: usize) -> Vec<f64> {
        if self.boost.is_empty() { vec![0.0; dim] } else { self.boost.clone() }
    }
}
