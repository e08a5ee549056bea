use blowuplab_core::numerics::interp::Hermite;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialData {
    /// "r", "r+sin(r)", "r-sin(r)" or "r^k".
    Named(String),
    Tabulated { r: Vec<f64>, u: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Identity,
    PlusSin,
    MinusSin,
    PowerK,
}

/// Initial data resolved into an evaluable function.
pub struct InitialProfile {
    family: Option<Family>,
    table: Option<Hermite>,
    k: i32,
}

impl InitialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match (self.family, &self.table) {
            (Some(Family::Identity), _) => r,
            (Some(Family::PlusSin), _) => r + r.sin(),
            (Some(Family::MinusSin), _) => {
                if r < 1e-3 {
                    let r3 = r * r * r;
                    r3 / 6.0 - r3 * r * r / 120.0
                } else {
                    r - r.sin()
                }
            }
            (Some(Family::PowerK), _) => r.powi(self.k),
            (None, Some(t)) => t.eval(r.clamp(t.x_min(), t.x_max())),
            _ => unreachable!(),
        }
    }
}

impl InitialData {
    pub fn resolve(&self, k: u32, length: f64) -> SimResult<InitialProfile> {
        match self {
            InitialData::Named(name) => {
                let key: String = name.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('−', "-");
                let family = match key.as_str() {
                    "r" => Family::Identity,
                    "r+sin(r)" => Family::PlusSin,
                    "r-sin(r)" => Family::MinusSin,
                    "r^k" => Family::PowerK,
                    _ => return Err(SimError::BadInitialData(format!("unknown initial data family {name:?}"))),
                };
                Ok(InitialProfile { family: Some(family), table: None, k: k as i32 })
            }
            InitialData::Tabulated { r, u } => {
                if r.len() != u.len() || r.len() < 2 {
                    return Err(SimError::BadInitialData("tabulated data needs matching r and u with at least 2 points".into()));
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] != 0.0 {
                    return Err(SimError::BadInitialData("tabulated r must start at 0 and increase strictly".into()));
                }
                if u[0].abs() > 1e-12 {
                    return Err(SimError::BadInitialData(format!("u(0) must be 0, got {}", u[0])));
                }
                if *r.last().unwrap() < length {
                    return Err(SimError::BadInitialData(format!("table ends at r={} before L={length}", r.last().unwrap())));
                }
                let m: Vec<f64> = (0..r.len())
                    .map(|i| {
                        let (a, b) = if i == 0 { (0, 1) } else if i + 1 == r.len() { (i - 1, i) } else { (i - 1, i + 1) };
                        (u[b] - u[a]) / (r[b] - r[a])
                    })
                    .collect();
                Ok(InitialProfile { family: None, table: Some(Hermite::new(r.clone(), u.clone(), m)), k: k as i32 })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct MonitorParams {
    /// Share of nodes distributed by arclength √(1 + u_r²).
    pub arc_weight: f64,
    /// Share of nodes distributed uniformly in log(r + R).
    pub log_weight: f64,
    /// Share of nodes distributed uniformly in r.
    pub uniform_weight: f64,
    /// Passes of the (1,4,6,4,1)/16 filter applied to the cell monitor.
    pub smoothing_passes: usize,
    /// Mesh relaxation rate in units of (M−1)²/R².
    pub relax: f64,
}

impl Default for MonitorParams {
    fn default() -> Self {
        Self { arc_weight: 0.15, log_weight: 0.75, uniform_weight: 0.1, smoothing_passes: 1, relax: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Mesh position error relative to the local spacing.
    pub mesh_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-6, atol: 1e-6, mesh_tol: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimConfig {
    pub d: f64,
    pub k: u32,
    #[serde(default = "default_length", rename = "L")]
    pub length: f64,
    #[serde(default = "default_initial")]
    pub initial_data: InitialData,
    #[serde(default = "default_nodes", rename = "M")]
    pub nodes: usize,
    #[serde(default)]
    pub monitor: MonitorParams,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_gradient")]
    pub max_gradient: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// sup|u_r| levels at which snapshots are stored.
    #[serde(default = "default_snapshot_gradients")]
    pub snapshot_gradients: Vec<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn default_length() -> f64 {
    5.0
}
fn default_initial() -> InitialData {
    InitialData::Named("r".into())
}
fn default_nodes() -> usize {
    1600
}
fn default_max_gradient() -> f64 {
    1e8
}
fn default_t_max() -> f64 {
    10.0
}
fn default_max_steps() -> usize {
    400_000
}
fn default_snapshot_gradients() -> Vec<f64> {
    (4..=32).map(|i| 10f64.powf(i as f64 / 4.0)).collect()
}

impl SimConfig {
    pub fn new(d: f64, k: u32, initial: &str) -> Self {
        Self {
            d,
            k,
            length: default_length(),
            initial_data: InitialData::Named(initial.into()),
            nodes: default_nodes(),
            monitor: MonitorParams::default(),
            tolerances: Tolerances::default(),
            max_gradient: default_max_gradient(),
            t_max: default_t_max(),
            max_steps: default_max_steps(),
            snapshot_gradients: default_snapshot_gradients(),
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.d > 2.0) || self.k == 0 {
            return bad(format!("need d > 2 and k ≥ 1, got d={} k={}", self.d, self.k));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("L must be positive, got {}", self.length));
        }
        if self.nodes < 64 {
            return bad(format!("M must be at least 64, got {}", self.nodes));
        }
        if !(self.max_gradient >= 1e6) {
            return bad(format!("maxGradient must be at least 1e6, got {}", self.max_gradient));
        }
        let m = &self.monitor;
        if m.arc_weight < 0.0 || m.log_weight < 0.0 || m.uniform_weight <= 0.0 || m.relax <= 0.0 {
            return bad("monitor weights must be non-negative, uniform weight and relax positive".into());
        }
        let t = &self.tolerances;
        if !(t.rtol > 0.0 && t.atol > 0.0 && t.mesh_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.t_max > 0.0) {
            return bad("tMax must be positive".into());
        }
        self.initial_data.resolve(self.k, self.length)?;
        Ok(())
    }
}
