//! Experiment configuration: JSON schema, parsing and validation.

use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

use cascade_core::models::ModelKind;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Top-level experiment configuration, dispatched on the `mode` field.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExperimentConfig {
    Trace(TraceConfig),
    Phase(PhaseConfig),
    Vm(VmConfig),
    Sis(SisConfig),
    Stochastic(StochasticConfig),
    Clearing(ClearingConfig),
}

impl ExperimentConfig {
    pub fn mode_name(&self) -> &'static str {
        match self {
            ExperimentConfig::Trace(_) => "trace",
            ExperimentConfig::Phase(_) => "phase",
            ExperimentConfig::Vm(_) => "vm",
            ExperimentConfig::Sis(_) => "sis",
            ExperimentConfig::Stochastic(_) => "stochastic",
            ExperimentConfig::Clearing(_) => "clearing",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub model: ModelKind,
    pub network: PathBuf,
    pub nodes: PathBuf,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default = "default_trace_output")]
    pub output: String,
}

fn default_trace_output() -> String {
    "trace.json".to_string()
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMethodName {
    Mf1I,
    Mf1Ii,
    Mf1Iii,
    Mf2,
    Mf3,
}

impl PhaseMethodName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseMethodName::Mf1I => "mf1-i",
            PhaseMethodName::Mf1Ii => "mf1-ii",
            PhaseMethodName::Mf1Iii => "mf1-iii",
            PhaseMethodName::Mf2 => "mf2",
            PhaseMethodName::Mf3 => "mf3",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub method: PhaseMethodName,
    #[serde(default)]
    pub phi0: Option<f64>,
    #[serde(default)]
    pub k: Option<u32>,
    pub mu: GridRange,
    pub sigma: GridRange,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_phase_output")]
    pub output: String,
    /// Optional JSON sidecar with the grid and solver settings.
    #[serde(default)]
    pub metadata: Option<String>,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    100_000
}

fn default_phase_output() -> String {
    "phase.csv".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmConfig {
    pub n: usize,
    pub x0: f64,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default = "default_vm_max_time")]
    pub max_time: usize,
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

fn default_vm_max_time() -> usize {
    1_000_000
}

fn default_series() -> String {
    "series.csv".to_string()
}

fn default_summary() -> String {
    "summary.json".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SisConfig {
    pub nu: f64,
    pub delta: f64,
    pub k: u32,
    pub x0: f64,
    #[serde(default = "default_sis_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_sis_tol")]
    pub tol: f64,
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

fn default_sis_max_steps() -> usize {
    100_000
}

fn default_sis_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticConfig {
    pub model: ModelKind,
    pub network: PathBuf,
    pub nodes: PathBuf,
    pub beta: f64,
    pub beta_prime: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub steps: usize,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClearingConfig {
    pub input: PathBuf,
    #[serde(default = "default_clearing_tol")]
    pub tol: f64,
    #[serde(default = "default_clearing_output")]
    pub output: String,
}

fn default_clearing_tol() -> f64 {
    1e-10
}

fn default_clearing_output() -> String {
    "clearing.json".to_string()
}

fn validate_grid(name: &str, g: &GridRange) -> Result<(), ConfigError> {
    if g.count == 0 {
        return Err(err(format!("{name}.count must be at least 1")));
    }
    if !(g.max >= g.min) {
        return Err(err(format!("{name}.max must be at least {name}.min")));
    }
    Ok(())
}

/// Parse and validate a config file. Errors name the offending field.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| err(format!("{}: {e}", path.display())))?;
    validate(&config)?;
    Ok(config)
}

pub fn validate(config: &ExperimentConfig) -> Result<(), ConfigError> {
    match config {
        ExperimentConfig::Trace(c) => {
            if let Some(0) = c.max_steps {
                return Err(err("max_steps must be at least 1"));
            }
        }
        ExperimentConfig::Phase(c) => {
            validate_grid("mu", &c.mu)?;
            validate_grid("sigma", &c.sigma)?;
            if c.sigma.min <= 0.0 {
                return Err(err("sigma.min must be positive"));
            }
            if !(c.tol > 0.0) {
                return Err(err("tol must be positive"));
            }
            match c.method {
                PhaseMethodName::Mf1Ii => {
                    if c.phi0.is_none() {
                        return Err(err("method mf1-ii requires phi0"));
                    }
                }
                PhaseMethodName::Mf2 | PhaseMethodName::Mf3 => match c.k {
                    None => return Err(err(format!("method {} requires k", c.method.as_str()))),
                    Some(0) => return Err(err("k must be at least 1")),
                    Some(_) => {}
                },
                _ => {}
            }
        }
        ExperimentConfig::Vm(c) => {
            if c.n < 2 {
                return Err(err("n must be at least 2"));
            }
            if !(0.0..=1.0).contains(&c.x0) {
                return Err(err("x0 must lie in [0,1]"));
            }
            if c.replicas == 0 {
                return Err(err("replicas must be at least 1"));
            }
        }
        ExperimentConfig::Sis(c) => {
            for (name, v) in [("nu", c.nu), ("delta", c.delta), ("x0", c.x0)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(format!("{name} must lie in [0,1]")));
                }
            }
            if c.k == 0 {
                return Err(err("k must be at least 1"));
            }
        }
        ExperimentConfig::Stochastic(c) => {
            for (name, v) in [("gamma", c.gamma), ("gamma_prime", c.gamma_prime)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(format!("{name} must lie in [0,1]")));
                }
            }
            if c.replicas == 0 {
                return Err(err("replicas must be at least 1"));
            }
        }
        ExperimentConfig::Clearing(c) => {
            if !(c.tol > 0.0) {
                return Err(err("tol must be positive"));
            }
        }
    }
    Ok(())
}
