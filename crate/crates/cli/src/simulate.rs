//! Simulation runs, fits and run-directory plumbing.

use std::fs;
use std::path::{Path, PathBuf};

use blowuplab_core::params::{self, ModelParams};
use blowuplab_meshsim::config::InitialData;
use blowuplab_meshsim::{fit_log, fit_power, io, FitKind, FitResult, Observables, Outcome, RunTrace, SimConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{self, sha256_hex};
use crate::output::{num, slug};

pub const DEFAULT_DECADES: f64 = 3.0;
pub const DEFAULT_EFOLDS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitSpec {
    pub kind: FitKind,
    /// Exponent of (−log(T−t) − s₀) in the log model.
    pub p: f64,
    pub decades: f64,
    pub efolds: f64,
}

impl FitSpec {
    pub fn power() -> Self {
        Self { kind: FitKind::PowerFit, p: 1.0, decades: DEFAULT_DECADES, efolds: DEFAULT_EFOLDS }
    }

    pub fn log(p: f64) -> Self {
        Self { kind: FitKind::LogFit, p, decades: DEFAULT_DECADES, efolds: DEFAULT_EFOLDS }
    }

    /// Log fit when the first admissible mode is neutral, power fit otherwise.
    pub fn for_params(d: f64, k: u32) -> Self {
        let p = ModelParams::new(d, k);
        match (params::classify(&p), params::derive(&p)) {
            (Ok(c), Ok(dc)) if c.neutral_index == Some(c.min_admissible_n) => Self::log(1.0 / dc.delta),
            _ => Self::power(),
        }
    }

    pub fn apply(&self, rows: &[Observables]) -> blowuplab_meshsim::SimResult<FitResult> {
        match self.kind {
            FitKind::PowerFit => fit_power(rows, self.decades),
            FitKind::LogFit => fit_log(rows, self.p, self.efolds),
        }
    }
}

pub fn config_hash(c: &SimConfig) -> String {
    sha256_hex(&serde_json::to_vec(c).expect("config serializes"))
}

fn initial_label(c: &SimConfig) -> String {
    match &c.initial_data {
        InitialData::Named(n) => slug(n),
        InitialData::Tabulated { .. } => "table".into(),
    }
}

/// Deterministic directory name: identical configs map to the same directory.
pub fn run_dir_name(c: &SimConfig) -> String {
    format!("sim-d{}-k{}-{}-M{}-{}", num(c.d), c.k, initial_label(c), c.nodes, &config_hash(c)[..10])
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulateReport {
    pub dir: PathBuf,
    pub config_hash: String,
    pub outcome: Outcome,
    pub steps: usize,
    pub rejected: usize,
    pub max_energy_increase: f64,
    pub snapshots: usize,
    pub fit: Option<FitResult>,
    /// "ok", "NoBlowup", "MaxSteps" or the fit error.
    pub status: String,
}

impl SimulateReport {
    pub fn succeeded(&self) -> bool {
        self.fit.is_some()
    }
}

pub struct SimulateOutput {
    pub report: SimulateReport,
    pub trace: RunTrace,
}

pub fn read_config(path: &Path) -> CliResult<SimConfig> {
    io::read_config(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Reads either one config object or an array of configs.
pub fn read_sweep(path: &Path) -> CliResult<Vec<SimConfig>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let items = match v {
        serde_json::Value::Array(a) => a,
        other => vec![other],
    };
    items
        .into_iter()
        .map(|item| {
            let c: SimConfig = serde_json::from_value(item).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            c.validate()?;
            Ok(c)
        })
        .collect()
}

pub fn simulate_with_trace(config: &SimConfig, root: &Path) -> CliResult<SimulateOutput> {
    config.validate()?;
    let started = manifest::now();
    let trace = blowuplab_meshsim::run(config)?;
    let dir = root.join(run_dir_name(config));
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    io::write_run(&dir, config, &trace)?;
    let (fit, status) = match trace.outcome {
        Outcome::Blowup => match FitSpec::for_params(config.d, config.k).apply(&trace.rows) {
            Ok(f) => {
                io::write_fit(&dir.join("fit.json"), &f)?;
                (Some(f), "ok".to_string())
            }
            Err(e) => (None, format!("fit failed: {e}")),
        },
        o => (None, format!("{o:?}")),
    };
    let hash = config_hash(config);
    manifest::write_manifest(&dir, "simulate", Some(hash.clone()), started)?;
    let report = SimulateReport {
        dir,
        config_hash: hash,
        outcome: trace.outcome,
        steps: trace.steps,
        rejected: trace.rejected,
        max_energy_increase: trace.max_energy_increase,
        snapshots: trace.snapshots.len(),
        fit,
        status,
    };
    Ok(SimulateOutput { report, trace })
}

pub fn simulate(config: &SimConfig, root: &Path) -> CliResult<SimulateReport> {
    simulate_with_trace(config, root).map(|o| o.report)
}

/// Independent runs on a worker pool; each directory is written by one worker.
pub fn sweep(configs: &[SimConfig], root: &Path, jobs: Option<usize>) -> CliResult<Vec<CliResult<SimulateReport>>> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    let pool = b.build().map_err(|e| CliError::Stage(e.to_string()))?;
    Ok(pool.install(|| configs.par_iter().map(|c| simulate(c, root)).collect()))
}

/// Refits the trace of an existing run directory and rewrites fit.json.
pub fn fit_run(dir: &Path, spec: Option<FitSpec>) -> CliResult<FitResult> {
    let started = manifest::now();
    let config = read_config(&dir.join("config.json"))?;
    let rows = io::read_trace(&dir.join("trace.csv"))?;
    let summary: io::RunSummary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    if summary.outcome != Outcome::Blowup {
        return Err(CliError::Stage(format!("run ended with {:?}; nothing to fit", summary.outcome)));
    }
    let spec = spec.unwrap_or_else(|| FitSpec::for_params(config.d, config.k));
    let f = spec.apply(&rows)?;
    io::write_fit(&dir.join("fit.json"), &f)?;
    let (command, hash, started) = match manifest::read_manifest(dir) {
        Ok(m) => (m.command, m.config_hash, m.started_at),
        Err(_) => ("fit".to_string(), Some(config_hash(&config)), started),
    };
    manifest::write_manifest(dir, &command, hash, started)?;
    Ok(f)
}
