use serde::Serialize;

use crate::sim::{DdTime, Snapshot};

/// Snapshot in self-similar variables y = r/√(T−t), s = −log(T−t).
#[derive(Debug, Clone, Serialize)]
pub struct SelfSimilarSnapshot {
    pub s: f64,
    /// T − t.
    pub tau: f64,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
    /// √(T−t)·∂_r u(0, t).
    pub scaled_gradient: f64,
}

impl SelfSimilarSnapshot {
    /// Piecewise-linear evaluation; constant beyond the last node.
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.y.len();
        if y <= self.y[0] {
            return self.f[0];
        }
        if y >= self.y[n - 1] {
            return self.f[n - 1];
        }
        let i = self.y.partition_point(|v| *v <= y) - 1;
        let w = (y - self.y[i]) / (self.y[i + 1] - self.y[i]);
        self.f[i] + w * (self.f[i + 1] - self.f[i])
    }

    pub fn resample(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&y| self.eval(y)).collect()
    }

    /// ε = 1/(C_s √(T−t) ∂_r u(0,t)), the boundary-layer width implied by the gradient.
    pub fn epsilon(&self, cs: f64) -> f64 {
        1.0 / (cs * self.scaled_gradient)
    }
}

pub fn to_self_similar(snap: &Snapshot, t_blowup: DdTime) -> SelfSimilarSnapshot {
    let tau = t_blowup.diff(snap.obs.time());
    assert!(tau > 0.0, "snapshot at or after the blow-up time");
    let sq = tau.sqrt();
    SelfSimilarSnapshot {
        s: -tau.ln(),
        tau,
        y: snap.r.iter().map(|r| r / sq).collect(),
        f: snap.u.clone(),
        scaled_gradient: sq * snap.obs.dr_u0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Observables;

    #[test]
    fn time_and_scaling() {
        let t = 0.2;
        let tt = DdTime { hi: t, lo: 0.0 }.add((-13f64).exp());
        let obs = Observables { t, t_lo: 0.0, dr_u0: 10.0, sup_grad: 10.0, argmax_r: 0.0, energy: 0.0, min_dx: 0.0, layer_nodes: 0 };
        let snap = Snapshot { step: 0, obs, r: vec![0.0, 1e-3, 2e-3], u: vec![0.0, 0.5, 0.7] };
        let ss = to_self_similar(&snap, tt);
        assert!((ss.s - 13.0).abs() < 1e-9);
        assert!((ss.y[1] - 1e-3 / (-6.5f64).exp()).abs() < 1e-9);
        assert!((ss.eval(0.5 * (ss.y[1] + ss.y[2])) - 0.6).abs() < 1e-12);
        assert!((ss.epsilon(1.0) - 1.0 / ss.scaled_gradient).abs() < 1e-15);
    }
}
