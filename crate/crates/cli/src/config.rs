//! Experiment configuration: a TOML document with strict key checking.
//!
//! Every field has a default except where a command needs an explicit
//! choice (the horizon for `mean`, the sweep table for `sweep`). Command
//! line flags are applied as dotted-key overrides before deserialization,
//! so a flag and the equivalent config line are interchangeable.

use std::path::{Path, PathBuf};

use kpp_core::coeff::{
    equilibrium_path, make_constant, make_periodic, make_switching, CoefficientPath, NoiseParams, NoisePath,
};
use kpp_core::equilibria::TAIL_TARGET;
use kpp_core::fronts::{BurnIn, DEFAULT_LEVELS};
use kpp_core::kppsolve::{Grid1D, InitialData, SolveConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Mean,
    Takeover,
    Interval,
    Stability,
    Certify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mean => "mean",
            Command::Takeover => "takeover",
            Command::Interval => "interval",
            Command::Stability => "stability",
            Command::Certify => "certify",
            Command::Sweep => "sweep",
        }
    }
}

/// Growth-rate path. Noise paths carry their seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathSpec {
    Constant {
        a: f64,
    },
    Periodic {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    Switching,
    /// The random equilibrium `Y(theta_t omega)` of squashed OU noise.
    NoiseEquilibrium {
        seed: u64,
        #[serde(default = "default_kappa")]
        kappa: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_xi_max")]
        xi_max: f64,
        #[serde(default = "default_noise_dt")]
        dt: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_trunc: Option<f64>,
    },
}

fn default_kappa() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.5
}
fn default_xi_max() -> f64 {
    0.5
}
fn default_noise_dt() -> f64 {
    0.01
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec::Constant { a: 1.0 }
    }
}

impl PathSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            PathSpec::NoiseEquilibrium { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Builds the path on `[t_lo, t_hi]`. Noise is generated far enough
    /// back that the equilibrium's truncated integral is available.
    pub fn build(&self, t_lo: f64, t_hi: f64) -> kpp_core::Result<CoefficientPath> {
        match *self {
            PathSpec::Constant { a } => make_constant(a, t_lo, t_hi),
            PathSpec::Periodic {
                mean,
                amplitude,
                period,
            } => make_periodic(mean, amplitude, period, t_lo, t_hi),
            PathSpec::Switching => make_switching(t_lo, t_hi),
            PathSpec::NoiseEquilibrium {
                seed,
                kappa,
                sigma,
                xi_max,
                dt,
                t_trunc,
            } => {
                let params = NoiseParams {
                    seed,
                    kappa,
                    sigma,
                    xi_max,
                    dt,
                };
                // worst-case truncation for any realization with |xi| <= xi_max
                let floor = 1.0 - xi_max;
                let worst = ((1.0 / TAIL_TARGET).ln() - floor.ln()) / floor;
                let history = t_trunc.unwrap_or(worst).max(worst) + 1.0;
                let noise = NoisePath::ou(params, t_lo - history, t_hi)?;
                equilibrium_path(&noise, t_lo, t_hi, t_trunc)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub dx: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_lo: -100.0,
            x_hi: 400.0,
            dx: 0.1,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> kpp_core::Result<Grid1D> {
        Grid1D::with_spacing(self.x_lo, self.x_hi, self.dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub dt: f64,
    pub t_end: f64,
    pub store_every: usize,
    /// Distance the level-1/2 front must keep from the domain ends.
    pub margin: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            dt: 0.005,
            t_end: 100.0,
            store_every: 100,
            margin: 50.0,
        }
    }
}

impl SolverSpec {
    pub fn build(&self) -> SolveConfig {
        SolveConfig::with_dt(self.dt)
            .store_every(self.store_every)
            .margin(self.margin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub levels: Vec<f64>,
    /// Speed-fit window; when absent the first `burn_in` fraction is dropped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
    pub burn_in: f64,
    /// Shortest averaging window for the mean estimates.
    pub r_min: f64,
    /// Window start stride; defaults to `r_min / 4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<f64>,
    /// Time range for the mean estimates. Required by `mean`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<(f64, f64)>,
    /// Takeover margin around the predicted speed.
    pub h: f64,
    /// Takeover check times; defaults to a quarter, half and all of `t_end`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_checks: Option<Vec<f64>>,
    pub c_min: f64,
    pub c_max: f64,
    pub c_step: f64,
    pub shift_count: usize,
    pub shift_scale: f64,
    pub t_probe: f64,
    pub mu: f64,
    /// Decay rate of the correction term; enables the lower bound in `certify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS.to_vec(),
            fit_window: None,
            burn_in: 0.25,
            r_min: 5.0,
            stride: None,
            horizon: None,
            h: 0.3,
            t_checks: None,
            c_min: 0.0,
            c_max: 3.0,
            c_step: 0.1,
            shift_count: 4,
            shift_scale: 10.0,
            t_probe: 80.0,
            mu: 0.8,
            mu_tilde: None,
            delta: None,
            d: None,
        }
    }
}

impl AnalysisSpec {
    pub fn burn_in(&self) -> BurnIn {
        match self.fit_window {
            Some((t_a, t_b)) => BurnIn::Window { t_a, t_b },
            None => BurnIn::Fraction { fraction: self.burn_in },
        }
    }

    pub fn stride(&self) -> f64 {
        self.stride.unwrap_or(self.r_min / 4.0)
    }

    /// Probe speeds `c_min, c_min + c_step, ...` up to `c_max`.
    pub fn c_grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.c_step > 0.0) || !(self.c_max >= self.c_min) {
            return Err(CliError::usage("probe speeds need c_step > 0 and c_max >= c_min"));
        }
        let n = ((self.c_max - self.c_min) / self.c_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.c_min + k as f64 * self.c_step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eps_spread: f64,
    pub eps_vanish: f64,
    pub outer_max: f64,
    pub inner_min: f64,
    /// Ordering and stability slack; defaults to the calibrated scheme model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_spread: 0.9,
            eps_vanish: 0.05,
            outer_max: 1e-3,
            inner_min: 0.99,
            slack: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    /// `key=value` overrides, same syntax as `--set`.
    #[serde(default)]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub command: Command,
    /// Applied to `path.seed`; empty runs each variant once.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub path: PathSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            output: default_output(),
            path: PathSpec::default(),
            grid: GridSpec::default(),
            solver: SolverSpec::default(),
            initial: None,
            analysis: AnalysisSpec::default(),
            tolerances: Tolerances::default(),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::usage(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, CliError> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::usage(e.to_string()))
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Loads `file` (or an empty document), applies `overrides` in order and
    /// deserializes the result.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            set_key(&mut table, k, v)?;
        }
        Self::from_table(table)
    }

    /// Same config with extra overrides applied.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table = self.to_table();
        for (k, v) in overrides {
            set_key(&mut table, k, v)?;
        }
        Self::from_table(table)
    }
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("expected key=value, got `{s}`")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::usage(format!("empty key in `{s}`")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Sets a dotted key. The value is read as a TOML literal, falling back to
/// a bare string so `--set output=runs/a` works without quotes.
pub fn set_key(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), CliError> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::usage(format!("`{p}` in `{key}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
