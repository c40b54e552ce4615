//! Experiment orchestration: run a parsed config and write its outputs.

use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cascade_core::io::{emit_trace, read_edge_list, read_node_attributes};
use cascade_core::meanfield::{
    linspace, phase_diagram, Mf1Class, MfMethod, PhaseDiagramGrid, SolverSettings,
};
use cascade_core::models::ModelSpec;
use cascade_core::network::run_cascade;
use cascade_core::stochastic::{
    seeded_rng, sis_macro_step, stochastic_cascade_ensemble, vm_monte_carlo_complete, SisParams,
    TransitionParams,
};
use cascade_core::FinancialSystem;

use crate::config::{
    ClearingConfig, ExperimentConfig, GridRange, PhaseConfig, PhaseMethodName, SisConfig,
    StochasticConfig, TraceConfig, VmConfig,
};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum RunError {
    Runtime(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for RunError {}

fn rt(msg: impl Into<String>) -> RunError {
    RunError::Runtime(msg.into())
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| rt(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| rt(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| rt(format!("cannot serialize {}: {e}", path.display())))?;
    write_file(path, &(json + "\n"))
}

/// Run one experiment; returns the list of files written.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    if !out_dir.as_os_str().is_empty() {
        fs::create_dir_all(out_dir)
            .map_err(|e| rt(format!("cannot create {}: {e}", out_dir.display())))?;
    }
    match config {
        ExperimentConfig::Trace(c) => run_trace(c, out_dir),
        ExperimentConfig::Phase(c) => run_phase(c, out_dir),
        ExperimentConfig::Vm(c) => run_vm(c, out_dir),
        ExperimentConfig::Sis(c) => run_sis(c, out_dir),
        ExperimentConfig::Stochastic(c) => run_stochastic(c, out_dir),
        ExperimentConfig::Clearing(c) => run_clearing(c, out_dir),
    }
}

fn run_trace(c: &TraceConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let network = read_edge_list(&c.network).map_err(|e| rt(e.to_string()))?;
    let attrs =
        read_node_attributes(&c.nodes, network.n()).map_err(|e| rt(e.to_string()))?;
    let spec = ModelSpec::from_kind(c.model, attrs.phi0.clone()).map_err(|e| rt(e.to_string()))?;
    let init = attrs.initial_state();
    let max_steps = c.max_steps.unwrap_or(network.n() + 1);
    let trace =
        run_cascade(&spec, &network, &init, max_steps).map_err(|e| rt(e.to_string()))?;
    let path = out_dir.join(&c.output);
    emit_trace(&trace, &path).map_err(|e| rt(e.to_string()))?;
    Ok(vec![path])
}

fn grid_values(g: &GridRange) -> Vec<f64> {
    linspace(g.min, g.max, g.count)
}

fn phase_method(c: &PhaseConfig) -> MfMethod {
    match c.method {
        PhaseMethodName::Mf1I => MfMethod::Mf1(Mf1Class::ConstantLoad),
        PhaseMethodName::Mf1Ii => MfMethod::Mf1(Mf1Class::LoadRedistribution {
            phi0: c.phi0.expect("validated"),
        }),
        PhaseMethodName::Mf1Iii => MfMethod::Mf1(Mf1Class::OverloadRedistribution),
        PhaseMethodName::Mf2 => MfMethod::Mf2 {
            k: c.k.expect("validated"),
        },
        PhaseMethodName::Mf3 => MfMethod::Mf3 {
            k: c.k.expect("validated"),
        },
    }
}

fn phase_csv(grid: &PhaseDiagramGrid) -> String {
    let mut out = String::from("mu,sigma,x0,x_star\n");
    for (i, &mu) in grid.mu_values.iter().enumerate() {
        for (j, &sigma) in grid.sigma_values.iter().enumerate() {
            let _ = writeln!(
                out,
                "{mu},{sigma},{},{}",
                grid.x0_at(i, j),
                grid.x_star_at(i, j)
            );
        }
    }
    out
}

#[derive(Serialize)]
struct PhaseMetadata<'a> {
    schema_version: u32,
    method: &'a str,
    phi0: Option<f64>,
    k: Option<u32>,
    mu: GridMeta,
    sigma: GridMeta,
    tol: f64,
    max_iter: usize,
}

#[derive(Serialize)]
struct GridMeta {
    min: f64,
    max: f64,
    count: usize,
}

impl From<&GridRange> for GridMeta {
    fn from(g: &GridRange) -> Self {
        GridMeta {
            min: g.min,
            max: g.max,
            count: g.count,
        }
    }
}

fn run_phase(c: &PhaseConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let method = phase_method(c);
    let settings = SolverSettings {
        tol: c.tol,
        max_iter: c.max_iter,
    };
    let grid = phase_diagram(
        &method,
        &grid_values(&c.mu),
        &grid_values(&c.sigma),
        &settings,
    )
    .map_err(|e| rt(e.to_string()))?;
    let csv_path = out_dir.join(&c.output);
    write_file(&csv_path, &phase_csv(&grid))?;
    let mut written = vec![csv_path];
    if let Some(meta_name) = &c.metadata {
        let meta = PhaseMetadata {
            schema_version: OUTPUT_SCHEMA_VERSION,
            method: c.method.as_str(),
            phi0: c.phi0,
            k: c.k,
            mu: (&c.mu).into(),
            sigma: (&c.sigma).into(),
            tol: c.tol,
            max_iter: c.max_iter,
        };
        let meta_path = out_dir.join(meta_name);
        write_json(&meta_path, &meta)?;
        written.push(meta_path);
    }
    Ok(written)
}

fn series_csv(header: &str, series: &[f64]) -> String {
    let mut out = format!("t,{header}\n");
    for (t, x) in series.iter().enumerate() {
        let _ = writeln!(out, "{t},{x}");
    }
    out
}

#[derive(Serialize)]
struct VmSummary {
    schema_version: u32,
    n: usize,
    x0: f64,
    initial_failed: usize,
    replicas: usize,
    seed: u64,
    consensus_one: usize,
    consensus_zero: usize,
    unresolved: usize,
    consensus_one_rate: f64,
    mean_consensus_time: Option<f64>,
}

fn run_vm(c: &VmConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let initial_failed = (c.x0 * c.n as f64).round() as usize;
    let mut ones = 0usize;
    let mut zeros = 0usize;
    let mut unresolved = 0usize;
    let mut time_sum = 0usize;
    let mut mean_x: Vec<f64> = Vec::new();
    let mut finals: Vec<f64> = Vec::with_capacity(c.replicas);
    for r in 0..c.replicas {
        let mut rng = seeded_rng(c.seed.wrapping_add(r as u64));
        let run = vm_monte_carlo_complete(c.n, initial_failed, c.max_time, &mut rng);
        match run.consensus {
            Some(true) => {
                ones += 1;
                time_sum += run.time;
            }
            Some(false) => {
                zeros += 1;
                time_sum += run.time;
            }
            None => unresolved += 1,
        }
        let last = *run.x_series.last().expect("series is never empty");
        finals.push(last);
        if run.x_series.len() > mean_x.len() {
            mean_x.resize(run.x_series.len(), 0.0);
        }
        for (t, slot) in mean_x.iter_mut().enumerate() {
            // absorbed replicas hold their final value
            *slot += run.x_series.get(t).copied().unwrap_or(last);
        }
    }
    for v in &mut mean_x {
        *v /= c.replicas as f64;
    }
    let resolved = ones + zeros;
    let summary = VmSummary {
        schema_version: OUTPUT_SCHEMA_VERSION,
        n: c.n,
        x0: c.x0,
        initial_failed,
        replicas: c.replicas,
        seed: c.seed,
        consensus_one: ones,
        consensus_zero: zeros,
        unresolved,
        consensus_one_rate: ones as f64 / c.replicas as f64,
        mean_consensus_time: if resolved > 0 {
            Some(time_sum as f64 / resolved as f64)
        } else {
            None
        },
    };
    let series_path = out_dir.join(&c.series);
    write_file(&series_path, &series_csv("mean_x", &mean_x))?;
    let summary_path = out_dir.join(&c.summary);
    write_json(&summary_path, &summary)?;
    Ok(vec![series_path, summary_path])
}

#[derive(Serialize)]
struct SisSummary {
    schema_version: u32,
    nu: f64,
    delta: f64,
    k: u32,
    x0: f64,
    x_star: f64,
    steps: usize,
    converged: bool,
    critical_nu: f64,
    endemic_fixed_point: Option<f64>,
}

fn run_sis(c: &SisConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let params = SisParams::new(c.nu, c.delta, c.k).map_err(|e| rt(e.to_string()))?;
    let mut series = vec![c.x0];
    let mut x = c.x0;
    let mut converged = false;
    for _ in 0..c.max_steps {
        let next = sis_macro_step(x, &params);
        series.push(next);
        let done = (next - x).abs() <= c.tol;
        x = next;
        if done {
            converged = true;
            break;
        }
    }
    let summary = SisSummary {
        schema_version: OUTPUT_SCHEMA_VERSION,
        nu: c.nu,
        delta: c.delta,
        k: c.k,
        x0: c.x0,
        x_star: x,
        steps: series.len() - 1,
        converged,
        critical_nu: params.critical_nu(),
        endemic_fixed_point: params.endemic_fixed_point(),
    };
    let series_path = out_dir.join(&c.series);
    write_file(&series_path, &series_csv("x", &series))?;
    let summary_path = out_dir.join(&c.summary);
    write_json(&summary_path, &summary)?;
    Ok(vec![series_path, summary_path])
}

#[derive(Serialize)]
struct StochasticSummary {
    schema_version: u32,
    model: String,
    beta: f64,
    beta_prime: f64,
    gamma: f64,
    gamma_prime: f64,
    steps: usize,
    replicas: usize,
    seed: u64,
    mean_final_x: f64,
    final_x: Vec<f64>,
}

fn run_stochastic(c: &StochasticConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let network = read_edge_list(&c.network).map_err(|e| rt(e.to_string()))?;
    let attrs =
        read_node_attributes(&c.nodes, network.n()).map_err(|e| rt(e.to_string()))?;
    let spec = ModelSpec::from_kind(c.model, attrs.phi0.clone()).map_err(|e| rt(e.to_string()))?;
    let init = attrs.initial_state();
    let params = TransitionParams::new(c.beta, c.beta_prime, c.gamma, c.gamma_prime, 0.0, 0.0)
        .map_err(|e| rt(e.to_string()))?;
    let (mean_x, finals) = stochastic_cascade_ensemble(
        &network, &init, &params, &spec, c.steps, c.replicas, c.seed,
    )
    .map_err(|e| rt(e.to_string()))?;
    let mean_final = finals.iter().sum::<f64>() / finals.len().max(1) as f64;
    let summary = StochasticSummary {
        schema_version: OUTPUT_SCHEMA_VERSION,
        model: c.model.to_string(),
        beta: c.beta,
        beta_prime: c.beta_prime,
        gamma: c.gamma,
        gamma_prime: c.gamma_prime,
        steps: c.steps,
        replicas: c.replicas,
        seed: c.seed,
        mean_final_x: mean_final,
        final_x: finals,
    };
    let series_path = out_dir.join(&c.series);
    write_file(&series_path, &series_csv("mean_x", &mean_x))?;
    let summary_path = out_dir.join(&c.summary);
    write_json(&summary_path, &summary)?;
    Ok(vec![series_path, summary_path])
}

#[derive(Serialize)]
struct ClearingOutput {
    schema_version: u32,
    x_star: Vec<f64>,
    defaults: Vec<usize>,
    equity: Vec<f64>,
    iterations: usize,
    diverged: bool,
}

fn run_clearing(c: &ClearingConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let text = fs::read_to_string(&c.input)
        .map_err(|e| rt(format!("cannot read {}: {e}", c.input.display())))?;
    let system: FinancialSystem = serde_json::from_str(&text)
        .map_err(|e| rt(format!("{}: {e}", c.input.display())))?;
    let result =
        cascade_core::fictitious_default(&system, c.tol).map_err(|e| rt(e.to_string()))?;
    let output = ClearingOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        x_star: result.x_star,
        defaults: result.defaults,
        equity: result.equity,
        iterations: result.iterations,
        diverged: result.diverged,
    };
    let path = out_dir.join(&c.output);
    write_json(&path, &output)?;
    Ok(vec![path])
}
