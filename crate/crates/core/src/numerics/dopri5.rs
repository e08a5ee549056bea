//! Dormand-Prince 5(4) with step-size control and 4th-order dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h0: None, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub stats: Stats,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates y' = f(t, y) from `t0` to the last entry of `outputs` (which must be
/// sorted in the direction of integration) and returns the state at every output.
pub fn solve<F>(mut f: F, t0: f64, y0: &[f64], outputs: &[f64], opts: &Options) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut out_t = Vec::with_capacity(outputs.len());
    let mut out_y = Vec::with_capacity(outputs.len());
    let mut stats = Stats::default();
    let Some(&t_end) = outputs.last() else {
        return Ok(Solution { t: out_t, y: out_y, stats });
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut next_out = 0;
    while next_out < outputs.len() && (outputs[next_out] - t0) * dir <= 0.0 {
        out_t.push(outputs[next_out]);
        out_y.push(y0.to_vec());
        next_out += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ys = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut cont = vec![[0.0f64; 5]; n];
    f(t, &y, &mut k1);
    stats.evaluations += 1;

    let mut h = match opts.h0 {
        Some(h) => h.abs(),
        None => initial_step(&y, &k1, opts),
    }
    .min(opts.h_max)
    .min((t_end - t0).abs());
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while next_out < outputs.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integrator(format!("step limit reached at t={t}")));
        }
        let remaining = (t_end - t).abs();
        if h >= remaining {
            h = remaining;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integrator(format!("step size underflow at t={t}")));
        }
        let hs = h * dir;
        for i in 0..n {
            ys[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &ys, &mut k2);
        for i in 0..n {
            ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &ys, &mut k3);
        for i in 0..n {
            ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &ys, &mut k4);
        for i in 0..n {
            ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &ys, &mut k5);
        for i in 0..n {
            ys[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + hs, &ys, &mut k6);
        for i in 0..n {
            y1[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + hs, &y1, &mut k7);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        // PI step-size controller
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / fac_old.powf(0.04);
        fac = (fac / 0.9).clamp(0.1, 5.0);
        let h_new = h / fac;
        if err <= 1.0 {
            fac_old = err.max(1e-4);
            stats.accepted += 1;
            for i in 0..n {
                let r2 = y1[i] - y[i];
                let r3 = hs * k1[i] - r2;
                let r4 = r2 - hs * k7[i] - r3;
                let r5 = hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                cont[i] = [y[i], r2, r3, r4, r5];
            }
            let t_new = t + hs;
            while next_out < outputs.len() && (outputs[next_out] - t_new) * dir <= 0.0 {
                let theta = (outputs[next_out] - t) / hs;
                let th1 = 1.0 - theta;
                let yo: Vec<f64> = cont
                    .iter()
                    .map(|c| c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4]))))
                    .collect();
                out_t.push(outputs[next_out]);
                out_y.push(yo);
                next_out += 1;
            }
            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut y1);
            t = t_new;
            let h_next = if last_rejected { h_new.min(h) } else { h_new };
            h = h_next.min(opts.h_max);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / 0.9).min(5.0);
            last_rejected = true;
        }
    }
    Ok(Solution { t: out_t, y: out_y, stats })
}

fn initial_step(y: &[f64], f0: &[f64], opts: &Options) -> f64 {
    let n = y.len() as f64;
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..y.len() {
        let sk = opts.atol + opts.rtol * y[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    let _ = n;
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_dense_output() {
        let outs: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
        let opts = Options { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let sol = solve(|_, y, dy| dy[0] = -y[0], 0.0, &[1.0], &outs, &opts).unwrap();
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - (-t).exp()).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_backward() {
        let outs = [-1.0, -2.0, -3.0];
        let opts = Options { rtol: 1e-11, atol: 1e-13, ..Default::default() };
        let sol = solve(|_, y, dy| { dy[0] = y[1]; dy[1] = -y[0]; }, 0.0, &[0.0, 1.0], &outs, &opts).unwrap();
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
            assert!((y[1] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn convergence_order_at_least_four() {
        // global error against tolerance: the scheme should tighten proportionally
        let run = |tol: f64| {
            let opts = Options { rtol: tol, atol: tol, ..Default::default() };
            let sol = solve(|t, y, dy| dy[0] = y[0] * t.cos(), 0.0, &[1.0], &[10.0], &opts).unwrap();
            ((sol.y[0][0] - (10f64).sin().exp()).abs(), sol.stats.evaluations as f64)
        };
        let (e1, n1) = run(1e-6);
        let (e2, n2) = run(1e-10);
        let order = (e1 / e2).ln() / (n2 / n1).ln();
        assert!(order >= 4.0, "observed order {order}");
    }
}
