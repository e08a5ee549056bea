//! Time stepping, observables and snapshots.

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{SimError, SimResult};
use crate::model::MeshModel;
use crate::rosenbrock::{BandedSystem, Rodas3};

/// Time as an unevaluated sum hi + lo, so that T − t stays resolved near blow-up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DdTime {
    pub hi: f64,
    pub lo: f64,
}

impl DdTime {
    pub fn add(self, dt: f64) -> Self {
        let s = self.hi + dt;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (dt - bp);
        let lo = self.lo + err;
        let hi = s + lo;
        Self { hi, lo: lo - (hi - s) }
    }

    /// self − other, accurate when the two are close.
    pub fn diff(self, other: DdTime) -> f64 {
        (self.hi - other.hi) + (self.lo - other.lo)
    }
}

#[derive(Debug, Clone)]
pub struct MeshState {
    pub t: DdTime,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t: f64,
    pub t_lo: f64,
    pub dr_u0: f64,
    pub sup_grad: f64,
    /// Radius at which sup|u_r| is attained.
    pub argmax_r: f64,
    pub energy: f64,
    pub min_dx: f64,
    /// Nodes inside r ≤ 5/sup|u_r|.
    pub layer_nodes: usize,
}

impl Observables {
    pub fn time(&self) -> DdTime {
        DdTime { hi: self.t, lo: self.t_lo }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    #[serde(flatten)]
    pub obs: Observables,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Blowup,
    NoBlowup,
    MaxSteps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<Observables>,
    pub snapshots: Vec<Snapshot>,
    pub outcome: Outcome,
    pub steps: usize,
    pub rejected: usize,
    /// Largest single-step energy increase relative to the current energy.
    pub max_energy_increase: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    pub rejected: usize,
}

pub struct Simulator {
    pub config: SimConfig,
    pub model: MeshModel,
    pub state: MeshState,
    pub dt: f64,
    solver: Rodas3,
    step_count: usize,
}

fn observe(model: &MeshModel, st: &MeshState) -> Observables {
    let (ur, _) = model.derivatives(&st.r, &st.u);
    let (mut sup, mut arg) = (0.0f64, 0.0);
    for (i, g) in ur.iter().enumerate() {
        if g.abs() > sup {
            sup = g.abs();
            arg = st.r[i];
        }
    }
    let min_dx = st.r.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let layer = 5.0 / sup;
    Observables {
        t: st.t.hi,
        t_lo: st.t.lo,
        dr_u0: ur[0],
        sup_grad: sup,
        argmax_r: arg,
        energy: model.energy(&st.r, &st.u),
        min_dx,
        layer_nodes: st.r.iter().filter(|r| **r <= layer).count(),
    }
}

/// Builds the initial mesh by fixed-point equidistribution of the monitor of u(r, 0).
pub fn initialize(config: &SimConfig) -> SimResult<(MeshModel, MeshState)> {
    config.validate()?;
    let prof = config.initial_data.resolve(config.k, config.length)?;
    let u0 = prof.eval(0.0);
    if u0.abs() > 1e-12 {
        return Err(SimError::BadInitialData(format!("u(0) must be 0, got {u0}")));
    }
    let m = config.nodes;
    let l = config.length;
    let u_right = prof.eval(l);
    let mut model = MeshModel::new(config.d, config.k, m, l, u_right, config.monitor);
    let mut r: Vec<f64> = (0..m).map(|i| l * (i as f64 / (m - 1) as f64)).collect();
    let sample = |r: &[f64]| -> Vec<f64> {
        let mut u: Vec<f64> = r.iter().map(|&x| prof.eval(x)).collect();
        u[0] = 0.0;
        u
    };
    for _ in 0..60 {
        let u = sample(&r);
        let sup = {
            let (ur, _) = model.derivatives(&r, &u);
            ur.iter().fold(0.0f64, |a, g| a.max(g.abs()))
        };
        model.freeze(&r, &u, sup.max(1e-3 / l));
        let rho = model.cell_monitor(&r, &u, &model.frozen);
        let mut cum = vec![0.0; m];
        for i in 0..m - 1 {
            cum[i + 1] = cum[i] + rho[i] * (r[i + 1] - r[i]);
        }
        let total = cum[m - 1];
        let mut next = vec![0.0; m];
        let mut c = 0;
        for (j, nx) in next.iter_mut().enumerate().take(m - 1).skip(1) {
            let target = total * j as f64 / (m - 1) as f64;
            while cum[c + 1] < target {
                c += 1;
            }
            *nx = r[c] + (target - cum[c]) / (cum[c + 1] - cum[c]) * (r[c + 1] - r[c]);
        }
        next[m - 1] = l;
        let change = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r = next;
        if change < 1e-12 * l {
            break;
        }
    }
    let u = sample(&r);
    Ok((model, MeshState { t: DdTime::default(), r, u }))
}

impl Simulator {
    pub fn new(config: &SimConfig) -> SimResult<Self> {
        let (model, state) = initialize(config)?;
        let n = model.len();
        let (kl, ku) = model.bandwidth();
        let obs = observe(&model, &state);
        let g = obs.sup_grad.max(1.0 / model.length);
        let dt = 1e-4 / (g * g);
        Ok(Self { config: config.clone(), model, state, dt, solver: Rodas3::new(n, kl, ku), step_count: 0 })
    }

    pub fn observables(&self) -> Observables {
        observe(&self.model, &self.state)
    }

    fn error_norm(&self, y0: &[f64], y1: &[f64], err: &[f64]) -> f64 {
        let tol = &self.config.tolerances;
        let n = y0.len();
        let mut acc = 0.0;
        for j in 0..n {
            let sc = if j % 2 == 0 {
                tol.atol + tol.rtol * y0[j].abs().max(y1[j].abs())
            } else {
                let left = if j >= 3 { y0[j] - y0[j - 2] } else { y0[j] };
                let right = if j + 2 < n { y0[j + 2] - y0[j] } else { self.model.length - y0[j] };
                tol.mesh_tol * left.min(right)
            };
            acc += (err[j] / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    }

    /// Advances one accepted step with error control.
    pub fn step(&mut self) -> SimResult<StepInfo> {
        let grad = self.observables().sup_grad.max(1.0 / self.model.length);
        self.model.freeze(&self.state.r, &self.state.u, grad);
        let y0 = self.model.pack(&self.state.r, &self.state.u);
        let time_scale = 1.0 / (grad * grad);
        self.solver.invalidate();
        let mut rejected = 0;
        loop {
            if self.dt < 1e-12 * time_scale || !self.dt.is_finite() {
                return Err(SimError::StepSizeUnderflow { t: self.state.t.hi, dt: self.dt });
            }
            let res = match self.solver.step(&self.model, &y0, self.dt) {
                Ok(r) => r,
                Err(_) => {
                    self.dt *= 0.25;
                    rejected += 1;
                    continue;
                }
            };
            let err = self.error_norm(&y0, &res.y, &res.err);
            let (r, u) = self.model.unpack(&res.y);
            let ordered = r.windows(2).all(|w| w[1] > w[0]) && r[0] == 0.0;
            let finite = res.y.iter().all(|v| v.is_finite());
            if err <= 1.0 && ordered && finite {
                let fac = if err > 0.0 { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0) } else { 5.0 };
                let dt = self.dt;
                self.state = MeshState { t: self.state.t.add(dt), r, u };
                self.dt = dt * if rejected > 0 { fac.min(1.0) } else { fac };
                self.step_count += 1;
                return Ok(StepInfo { dt, rejected });
            }
            rejected += 1;
            if !ordered && rejected > 40 {
                return Err(SimError::MeshTangling { t: self.state.t.hi });
            }
            let fac = if err.is_finite() && err > 0.0 && ordered { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.1, 0.9) } else { 0.25 };
            self.dt *= fac;
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { step: self.step_count, obs: self.observables(), r: self.state.r.clone(), u: self.state.u.clone() }
    }

    pub fn run(&mut self) -> SimResult<RunTrace> {
        let cfg = self.config.clone();
        let mut rows = vec![self.observables()];
        let mut snapshots = Vec::new();
        let mut grad_levels: Vec<f64> = cfg.snapshot_gradients.clone();
        grad_levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut times: Vec<f64> = cfg.snapshot_times.clone();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (mut gi, mut ti) = (0, 0);
        let mut rejected = 0;
        let mut max_inc = 0.0f64;
        let outcome = loop {
            let last = *rows.last().unwrap();
            while gi < grad_levels.len() && last.sup_grad >= grad_levels[gi] {
                if snapshots.last().map(|s: &Snapshot| s.step) != Some(self.step_count) {
                    snapshots.push(self.snapshot());
                }
                gi += 1;
            }
            while ti < times.len() && last.t >= times[ti] {
                if snapshots.last().map(|s: &Snapshot| s.step) != Some(self.step_count) {
                    snapshots.push(self.snapshot());
                }
                ti += 1;
            }
            if last.sup_grad >= cfg.max_gradient {
                break Outcome::Blowup;
            }
            if last.t >= cfg.t_max {
                break Outcome::NoBlowup;
            }
            if self.step_count >= cfg.max_steps {
                break Outcome::MaxSteps;
            }
            if ti < times.len() {
                let remaining = times[ti] - last.t;
                if remaining > 0.0 && self.dt > remaining {
                    self.dt = remaining;
                }
            }
            let info = self.step()?;
            rejected += info.rejected;
            let obs = self.observables();
            max_inc = max_inc.max((obs.energy - last.energy) / last.energy.abs().max(1e-300));
            rows.push(obs);
        };
        Ok(RunTrace { rows, snapshots, outcome, steps: self.step_count, rejected, max_energy_increase: max_inc })
    }
}

pub fn run(config: &SimConfig) -> SimResult<RunTrace> {
    Simulator::new(config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InitialData;

    #[test]
    fn dd_time_accumulates_small_steps() {
        let mut t = DdTime { hi: 0.2, lo: 0.0 };
        for _ in 0..1000 {
            t = t.add(1e-19);
        }
        let diff = t.diff(DdTime { hi: 0.2, lo: 0.0 });
        assert!((diff - 1e-16).abs() < 1e-28, "{diff}");
    }

    #[test]
    fn initial_identity_sampled() {
        let mut c = SimConfig::new(7.0, 1, "r");
        c.length = 2.0;
        c.nodes = 201;
        let (_, st) = initialize(&c).unwrap();
        assert_eq!(st.r[0], 0.0);
        assert_eq!(*st.r.last().unwrap(), 2.0);
        assert!(st.r.windows(2).all(|w| w[1] > w[0]));
        assert!(st.r.iter().zip(&st.u).all(|(r, u)| (r - u).abs() < 1e-15));
    }

    #[test]
    fn nonzero_origin_rejected() {
        let mut c = SimConfig::new(7.0, 1, "r");
        c.initial_data = InitialData::Tabulated { r: vec![0.0, 6.0], u: vec![0.1, 6.0] };
        assert!(matches!(initialize(&c), Err(SimError::BadInitialData(_))));
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut c = SimConfig::new(8.0, 1, "r");
        c.initial_data = InitialData::Tabulated { r: vec![0.0, 6.0], u: vec![0.0, 0.0] };
        c.nodes = 80;
        c.t_max = 0.05;
        let tr = run(&c).unwrap();
        assert_eq!(tr.outcome, Outcome::NoBlowup);
        assert!(tr.rows.iter().all(|o| o.sup_grad == 0.0));
    }

    #[test]
    fn short_run_flags_no_blowup_and_energy_decays() {
        let mut c = SimConfig::new(8.0, 1, "r");
        c.nodes = 120;
        c.t_max = 1e-3;
        let tr = run(&c).unwrap();
        assert_eq!(tr.outcome, Outcome::NoBlowup);
        assert!(tr.rows.windows(2).all(|w| w[1].energy <= w[0].energy * (1.0 + 1e-6)));
        assert!(tr.rows.last().unwrap().energy < tr.rows[0].energy);
    }
}
