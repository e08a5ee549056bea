//! Method of lines for u_t = u_rr + (d−1)u_r/r − K sin(2u)/(2r²) on a moving mesh.
//!
//! Interior unknowns are interleaved as (u_1, r_1, u_2, r_2, …). Next to the origin the
//! linear part is evaluated through w = u/r^k, for which it reads r^k (w_rr + (2k+d−1) w_r/r)
//! and carries no 1/r cancellation. Nodes follow a relaxed equidistribution law
//! ṙ_i = κ (m_{i+1/2} − m_{i−1/2}) / (ρ_{i+1/2} + ρ_{i−1/2}), m = ρ Δr.

use blowuplab_core::profile::sin_minus_id;

use crate::config::MonitorParams;
use crate::rosenbrock::BandedSystem;

/// Node reach of the right-hand side, giving a band of 2·REACH + 1 in the interleaved layout.
pub const REACH: usize = 3;

/// Nodes next to the origin on which the linear part is evaluated through w = u/r^k.
/// Beyond them the plain form is used, which keeps u ≡ π/2 an exact discrete equilibrium.
pub const W_NODES: usize = 8;

/// Global scalars of the monitor, held fixed over a step.
#[derive(Debug, Clone, Copy)]
pub struct Frozen {
    /// Current length scale 1/sup|u_r|.
    pub r_scale: f64,
    pub arc_total: f64,
    pub log_total: f64,
}

#[derive(Debug, Clone)]
pub struct MeshModel {
    pub d: f64,
    pub k: u32,
    pub kappa: f64,
    pub nodes: usize,
    pub length: f64,
    pub u_right: f64,
    pub monitor: MonitorParams,
    pub frozen: Frozen,
    pub mesh_rate: f64,
}

impl MeshModel {
    pub fn new(d: f64, k: u32, nodes: usize, length: f64, u_right: f64, monitor: MonitorParams) -> Self {
        let kf = k as f64;
        Self {
            d,
            k,
            kappa: kf * (d + kf - 2.0),
            nodes,
            length,
            u_right,
            monitor,
            frozen: Frozen { r_scale: 1.0, arc_total: 1.0, log_total: 1.0 },
            mesh_rate: 0.0,
        }
    }

    pub fn pack(&self, r: &[f64], u: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * (self.nodes - 2));
        for i in 1..self.nodes - 1 {
            y.push(u[i]);
            y.push(r[i]);
        }
        y
    }

    pub fn unpack(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.nodes;
        let mut r = vec![0.0; m];
        let mut u = vec![0.0; m];
        for i in 1..m - 1 {
            u[i] = y[2 * (i - 1)];
            r[i] = y[2 * (i - 1) + 1];
        }
        r[m - 1] = self.length;
        u[m - 1] = self.u_right;
        (r, u)
    }

    /// Spatial derivative data at every node: (u_r, linear operator applied to u).
    pub fn derivatives(&self, r: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.nodes;
        let k = self.k as i32;
        let kf = self.k as f64;
        let c = 2.0 * kf + self.d - 1.0;
        let w: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { u[i] / r[i].powi(k) }).collect();
        let mut ur = vec![0.0; m];
        let mut lu = vec![0.0; m];
        // even fit w = a + b r² through nodes 1 and 2
        let b = (w[2] - w[1]) / (r[2] * r[2] - r[1] * r[1]);
        let a = w[1] - b * r[1] * r[1];
        ur[0] = if k == 1 { a } else { 0.0 };
        let rk1 = r[1].powi(k);
        lu[1] = (4.0 * kf + 2.0 * self.d) * b * rk1;
        ur[1] = rk1 * 2.0 * b * r[1] + kf * r[1].powi(k - 1) * w[1];
        for i in 2..m - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let den = hp * hm * (hp + hm);
            let d1 = |f: &[f64]| (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i]) / den;
            let d2 = |f: &[f64]| 2.0 * (hm * f[i + 1] - (hp + hm) * f[i] + hp * f[i - 1]) / den;
            if i < W_NODES {
                let (wr, wrr) = (d1(&w), d2(&w));
                let rk = r[i].powi(k);
                lu[i] = rk * (wrr + c * wr / r[i]);
                ur[i] = rk * wr + kf * r[i].powi(k - 1) * w[i];
            } else {
                ur[i] = d1(u);
                lu[i] = d2(u) + (self.d - 1.0) * ur[i] / r[i] - self.kappa * u[i] / (r[i] * r[i]);
            }
        }
        let i = m - 1;
        let (h1, h2) = (r[i] - r[i - 1], r[i - 1] - r[i - 2]);
        // one-sided second-order slope at r = L
        ur[i] = (u[i] - u[i - 1]) / h1 + ((u[i] - u[i - 1]) / h1 - (u[i - 1] - u[i - 2]) / h2) * h1 / (h1 + h2);
        (ur, lu)
    }

    /// Smoothed cell monitor ρ_{i+1/2}, i = 0..M−2.
    pub fn cell_monitor(&self, r: &[f64], u: &[f64], fz: &Frozen) -> Vec<f64> {
        let raw = self.raw_monitor(r, u, fz);
        smooth(&raw, self.monitor.smoothing_passes)
    }

    fn raw_monitor(&self, r: &[f64], u: &[f64], fz: &Frozen) -> Vec<f64> {
        let mp = &self.monitor;
        (0..self.nodes - 1)
            .map(|i| {
                let dr = r[i + 1] - r[i];
                let g = (u[i + 1] - u[i]) / dr;
                let mid = 0.5 * (r[i] + r[i + 1]);
                mp.arc_weight * (1.0 + g * g).sqrt() / fz.arc_total
                    + mp.log_weight / ((mid + fz.r_scale) * fz.log_total)
                    + mp.uniform_weight / self.length
            })
            .collect()
    }

    /// Recomputes the frozen scalars from a full state.
    pub fn freeze(&mut self, r: &[f64], u: &[f64], sup_grad: f64) {
        let r_scale = 1.0 / sup_grad.max(1e-300);
        let mut arc = 0.0;
        for i in 0..self.nodes - 1 {
            let dr = r[i + 1] - r[i];
            let du = u[i + 1] - u[i];
            arc += (dr * dr + du * du).sqrt();
        }
        let log_total = ((self.length + r_scale) / r_scale).ln();
        self.frozen = Frozen { r_scale, arc_total: arc, log_total };
        let m1 = (self.nodes - 1) as f64;
        self.mesh_rate = self.monitor.relax * m1 * m1 / (r_scale * r_scale);
    }

    pub fn mesh_velocity(&self, r: &[f64], rho: &[f64]) -> Vec<f64> {
        let m = self.nodes;
        let mut v = vec![0.0; m];
        for i in 1..m - 1 {
            let mp = rho[i] * (r[i + 1] - r[i]);
            let mm = rho[i - 1] * (r[i] - r[i - 1]);
            v[i] = self.mesh_rate * (mp - mm) / (rho[i] + rho[i - 1]);
        }
        v
    }

    pub fn full_rhs(&self, r: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (ur, lu) = self.derivatives(r, u);
        let rho = self.cell_monitor(r, u, &self.frozen);
        let rdot = self.mesh_velocity(r, &rho);
        let mut udot = vec![0.0; self.nodes];
        for i in 1..self.nodes - 1 {
            let nl = -self.kappa * sin_minus_id(2.0 * u[i]) / (2.0 * r[i] * r[i]);
            udot[i] = lu[i] + nl + ur[i] * rdot[i];
        }
        (udot, rdot)
    }

    /// E = ½∫(u_r² + K sin²u/r²) r^{d−1} dr with exact power weights per cell.
    pub fn energy(&self, r: &[f64], u: &[f64]) -> f64 {
        let d = self.d;
        let mut e = 0.0;
        for i in 0..self.nodes - 1 {
            let (a, b) = (r[i], r[i + 1]);
            let g = (u[i + 1] - u[i]) / (b - a);
            let w = (b.powf(d) - a.powf(d)) / d;
            let pot = |j: usize| {
                if r[j] == 0.0 {
                    0.0
                } else {
                    u[j].sin().powi(2) * r[j].powf(d - 3.0)
                }
            };
            e += g * g * w + self.kappa * 0.5 * (pot(i) + pot(i + 1)) * (b - a);
        }
        0.5 * e
    }
}

/// (1,4,6,4,1)/16 filter with reflecting ends.
pub fn smooth(x: &[f64], passes: usize) -> Vec<f64> {
    let n = x.len();
    let mut cur = x.to_vec();
    let refl = |i: isize| -> usize {
        let mut j = i;
        if j < 0 {
            j = -j - 1;
        }
        if j >= n as isize {
            j = 2 * n as isize - j - 1;
        }
        j.clamp(0, n as isize - 1) as usize
    };
    for _ in 0..passes {
        let prev = cur.clone();
        for i in 0..n {
            let ii = i as isize;
            cur[i] = (prev[refl(ii - 2)] + 4.0 * prev[refl(ii - 1)] + 6.0 * prev[i] + 4.0 * prev[refl(ii + 1)] + prev[refl(ii + 2)]) / 16.0;
        }
    }
    cur
}

impl BandedSystem for MeshModel {
    fn len(&self) -> usize {
        2 * (self.nodes - 2)
    }

    fn bandwidth(&self) -> (usize, usize) {
        (2 * REACH + 1, 2 * REACH + 1)
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let (r, u) = self.unpack(y);
        let (udot, rdot) = self.full_rhs(&r, &u);
        for i in 1..self.nodes - 1 {
            dy[2 * (i - 1)] = udot[i];
            dy[2 * (i - 1) + 1] = rdot[i];
        }
    }

    fn perturbation(&self, y: &[f64], j: usize) -> f64 {
        if j % 2 == 0 {
            1.5e-8 * y[j].abs().max(1e-6)
        } else {
            let left = if j >= 3 { y[j] - y[j - 2] } else { y[j] };
            let right = if j + 2 < y.len() { y[j + 2] - y[j] } else { self.length - y[j] };
            1.5e-8 * left.min(right)
        }
    }
}
