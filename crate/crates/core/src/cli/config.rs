//! Run configuration: defaults, JSON config files and command-line flags
//! merged into one serializable record that is embedded in every output.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::classical::{SweepDirection, Window};
use crate::error::{Error, Result};
use crate::lindblad::{LindbladModel, MPRConvention};
use crate::params::{BasisKind, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    A,
    B,
}

impl From<Basis> for BasisKind {
    fn from(b: Basis) -> Self {
        match b {
            Basis::A => BasisKind::SystemPhotons,
            Basis::B => BasisKind::PumpPhotons,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl From<Direction> for SweepDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Up => SweepDirection::Up,
            Direction::Down => SweepDirection::Down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WindowArg {
    Rectangular,
    Hann,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Rectangular => Window::Rectangular,
            WindowArg::Hann => Window::Hann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Exact,
    Eff1a,
    Eff1b,
    Eff2b,
}

impl From<Model> for LindbladModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Exact => LindbladModel::ExactRotated,
            Model::Eff1a => LindbladModel::EffectiveOrder1A,
            Model::Eff1b => LindbladModel::EffectiveOrder1B,
            Model::Eff2b => LindbladModel::EffectiveOrder2B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Eq6,
    Degeneracy,
}

impl From<Convention> for MPRConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Eq6 => MPRConvention::Standard,
            Convention::Degeneracy => MPRConvention::DiagonalDegeneracy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Figure {
    #[serde(rename = "2a")]
    #[value(name = "2a")]
    Fig2a,
    #[serde(rename = "2c")]
    #[value(name = "2c")]
    Fig2c,
    #[serde(rename = "3b")]
    #[value(name = "3b")]
    Fig3b,
    #[serde(rename = "3c")]
    #[value(name = "3c")]
    Fig3c,
}

/// Subcommand options. Keys absent from a command's resolved config are
/// not used by it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    pub figure: Option<Figure>,
    /// Grid of `ω − ω0`.
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub n_points: Option<usize>,
    pub direction: Option<Direction>,
    pub settle_periods: Option<usize>,
    pub measure_periods: Option<usize>,
    pub samples_per_period: Option<usize>,
    pub tol: Option<f64>,
    pub periods: Option<usize>,
    pub window: Option<WindowArg>,
    pub x0: Option<f64>,
    pub p0: Option<f64>,
    pub basis: Option<Basis>,
    pub order: Option<u32>,
    pub dim: Option<usize>,
    /// Lab-frame drive grid; a single column at `F` when `force_steps` is unset.
    pub force_min: Option<f64>,
    pub force_max: Option<f64>,
    pub force_steps: Option<usize>,
    pub kappa: Option<f64>,
    pub model: Option<Model>,
    pub convention: Option<Convention>,
    pub n_max: Option<u32>,
}

const OPTION_KEYS: &[&str] = &[
    "figure",
    "delta_min",
    "delta_max",
    "n_points",
    "direction",
    "settle_periods",
    "measure_periods",
    "samples_per_period",
    "tol",
    "periods",
    "window",
    "x0",
    "p0",
    "basis",
    "order",
    "dim",
    "force_min",
    "force_max",
    "force_steps",
    "kappa",
    "model",
    "convention",
    "n_max",
];

const PARAM_KEYS: &[&str] = &["m", "omega0", "alpha", "F", "omega", "gamma", "hbar"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(flatten)]
    pub params: SystemParams,
    #[serde(flatten)]
    pub options: Options,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Seed for randomized checks; deterministic commands ignore it.
    #[serde(default)]
    pub seed: u64,
}

/// Drops `null` entries of a JSON object.
pub(crate) fn compact(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

impl RunConfig {
    /// Merges `layers` in order (later wins) and rejects unknown keys.
    pub fn from_layers(command: &str, layers: &[Map<String, Value>]) -> Result<Self> {
        let mut merged = Map::new();
        for layer in layers {
            for (k, v) in layer {
                if !v.is_null() {
                    merged.insert(k.clone(), v.clone());
                }
            }
        }
        merged.insert("command".into(), Value::String(command.into()));
        for key in merged.keys() {
            let known = OPTION_KEYS.contains(&key.as_str())
                || PARAM_KEYS.contains(&key.as_str())
                || matches!(key.as_str(), "command" | "output" | "seed");
            if !known {
                return Err(Error::invalid(format!("unknown config key '{key}'")));
            }
        }
        serde_json::from_value(Value::Object(merged))
            .map_err(|e| Error::invalid(format!("bad config: {e}")))
    }

    /// Single-line JSON without unset options.
    pub fn to_json(&self) -> String {
        let map = compact(serde_json::to_value(self).expect("config serializes"));
        serde_json::to_string(&Value::Object(map)).expect("config serializes")
    }

    pub fn to_value(&self) -> Value {
        Value::Object(compact(serde_json::to_value(self).expect("config serializes")))
    }

    /// `# kerr-floquet <version>` and `# config: <json>` lines.
    pub fn header(&self) -> String {
        format!(
            "# kerr-floquet {}\n# config: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.to_json()
        )
    }
}

/// Recovers the config embedded in an output file: the `# config:` comment
/// of CSV output or the `config` member of JSON output.
pub fn read_header_config(text: &str) -> Result<RunConfig> {
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        return Ok(serde_json::from_str(line)?);
    }
    let v: Value = serde_json::from_str(text)?;
    match v.get("config") {
        Some(c) => Ok(serde_json::from_value(c.clone())?),
        None => Err(Error::invalid("output carries no embedded config")),
    }
}

/// Default parameters: `m = ω0 = ħ = 1`, `U_a = 1e-2`, `F_a = 1e-4`,
/// `γ = 2.5e-3`, resonant drive.
pub fn default_params() -> SystemParams {
    SystemParams::from_a_basis(1.0, 1.0, 1.0, 1e-2, 1e-4, 0.0).with_gamma(2.5e-3)
}
