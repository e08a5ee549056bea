//! Blow-up time and rate extraction from ∂_r u(0, t).
//!
//! Times are handled relative to the last sample, x_j = t_j − t_last, and the blow-up
//! time enters as τ = T − t_last > 0.

use blowuplab_core::numerics::{lsq, optimize};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::sim::{DdTime, Observables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitKind {
    PowerFit,
    LogFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    /// Span of −log(T−t) covered.
    pub log_span: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitResult {
    pub kind: FitKind,
    #[serde(rename = "T")]
    pub t_blowup: f64,
    /// T − t at the last sample.
    pub tau_last: f64,
    pub beta: Option<f64>,
    pub beta_stderr: Option<f64>,
    /// Combined regression and window-split uncertainty of β.
    pub beta_uncertainty: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub c_stderr: Option<f64>,
    /// Combined regression and window-split uncertainty of C.
    pub c_uncertainty: Option<f64>,
    pub s0: Option<f64>,
    pub exponent: Option<f64>,
    pub residual: f64,
    pub r_squared: f64,
    pub window: FitWindow,
}

/// (t, x = t − t_last, g) for samples with positive gradient.
pub fn series(rows: &[Observables]) -> SimResult<(DdTime, Vec<f64>, Vec<f64>)> {
    let last = rows.last().ok_or_else(|| SimError::WindowTooShort("empty trace".into()))?.time();
    let mut x = Vec::with_capacity(rows.len());
    let mut g = Vec::with_capacity(rows.len());
    for o in rows {
        if o.dr_u0 > 0.0 {
            x.push(o.time().diff(last));
            g.push(o.dr_u0);
        }
    }
    Ok((last, x, g))
}

/// Synthetic observables for a prescribed g(t).
pub fn synthetic(times: &[f64], g: impl Fn(f64) -> f64) -> Vec<Observables> {
    times
        .iter()
        .map(|&t| Observables {
            t,
            t_lo: 0.0,
            dr_u0: g(t),
            sup_grad: g(t),
            argmax_r: 0.0,
            energy: 0.0,
            min_dx: 0.0,
            layer_nodes: 0,
        })
        .collect()
}

/// Power-law fit: q = d log g/dt = (½+β)/(T−t), so 1/q is linear in t with root T.
/// The window is the last `decades` decades of T−t.
pub fn fit_power(rows: &[Observables], decades: f64) -> SimResult<FitResult> {
    let (last, x, g) = series(rows)?;
    if x.len() < 12 {
        return Err(SimError::WindowTooShort(format!("{} samples", x.len())));
    }
    let mut xm = Vec::with_capacity(x.len());
    let mut invq = Vec::with_capacity(x.len());
    for j in 0..x.len() - 1 {
        let dx = x[j + 1] - x[j];
        let dl = (g[j + 1] / g[j]).ln();
        if dx > 0.0 && dl > 0.0 {
            xm.push(0.5 * (x[j] + x[j + 1]));
            invq.push(dx / dl);
        }
    }
    let n = xm.len();
    if n < 10 {
        return Err(SimError::WindowTooShort(format!("{n} increasing samples")));
    }
    let mut start = n - n.min(10).max(n / 4);
    let mut out = None;
    for _ in 0..20 {
        let f = lsq::line_fit(&xm[start..], &invq[start..]).ok_or_else(|| SimError::DegenerateFit("line fit failed".into()))?;
        if !(f.slope < 0.0) {
            return Err(SimError::DegenerateFit(format!("1/q slope {} not negative", f.slope)));
        }
        let p = -1.0 / f.slope;
        let tau = f.intercept * p;
        if !(tau > 0.0) {
            return Err(SimError::DegenerateFit(format!("fitted T precedes the last sample (tau={tau:e})")));
        }
        let lim = tau * 10f64.powf(decades);
        let new_start = xm.iter().position(|&v| tau - v <= lim).unwrap_or(0);
        out = Some((f, p, tau, start));
        if new_start == start {
            break;
        }
        start = new_start;
    }
    let (f, p, tau, start) = out.unwrap();
    let used = n - start;
    if used < 8 {
        return Err(SimError::WindowTooShort(format!("{used} samples in the last {decades} decades")));
    }
    let span = ((tau - xm[start]) / (tau - xm[n - 1])).ln();
    if span < 0.5 * decades * std::f64::consts::LN_10 {
        return Err(SimError::WindowTooShort(format!("window spans only {:.2} e-folds of T−t", span)));
    }
    let t_first = last.add(xm[start]).hi;
    let mid = start + used / 2;
    let half_beta = |a: usize, b: usize| lsq::line_fit(&xm[a..b], &invq[a..b]).map(|f| -1.0 / f.slope - 0.5);
    let split = match (half_beta(start, mid), half_beta(mid, n)) {
        (Some(a), Some(b)) => 0.5 * (a - b).abs(),
        _ => f64::NAN,
    };
    let stderr = f.slope_stderr * p * p;
    Ok(FitResult {
        kind: FitKind::PowerFit,
        t_blowup: last.add(tau).hi,
        tau_last: tau,
        beta: Some(p - 0.5),
        beta_stderr: Some(stderr),
        beta_uncertainty: Some(stderr.hypot(split)),
        c: None,
        c_stderr: None,
        c_uncertainty: None,
        s0: None,
        exponent: Some(p),
        residual: (f.rss / used as f64).sqrt(),
        r_squared: f.r_squared,
        window: FitWindow { t_start: t_first, t_end: last.add(xm[n - 1]).hi, samples: used, log_span: span },
    })
}

struct LogEval {
    rss: f64,
    c: f64,
    c_stderr: f64,
    s0: f64,
    r2: f64,
    n: usize,
}

fn log_model(x: &[f64], g: &[f64], idx: &[usize], tau: f64, p: f64) -> Option<LogEval> {
    let sig: Vec<f64> = idx.iter().map(|&j| -(tau - x[j]).ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&j| (tau - x[j]).sqrt() * g[j]).collect();
    if (p - 1.0).abs() < 1e-12 {
        let f = lsq::line_fit(&sig, &y)?;
        return Some(LogEval { rss: f.rss, c: f.slope, c_stderr: f.slope_stderr, s0: -f.intercept / f.slope, r2: f.r_squared, n: sig.len() });
    }
    // y = C (σ − s0)^p: closed-form C for each s0, golden search over s0 below min σ
    let smin = sig.iter().cloned().fold(f64::INFINITY, f64::min);
    let eval = |s0: f64| {
        let b: Vec<f64> = sig.iter().map(|s| (s - s0).powf(p)).collect();
        let c = b.iter().zip(&y).map(|(b, y)| b * y).sum::<f64>() / b.iter().map(|b| b * b).sum::<f64>();
        let rss: f64 = b.iter().zip(&y).map(|(b, y)| (y - c * b).powi(2)).sum();
        (rss, c)
    };
    let (s0, rss) = optimize::golden_min(|s| eval(s).0, smin - 200.0, smin - 1e-6, 1e-10);
    let c = eval(s0).1;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    Some(LogEval { rss, c, c_stderr: f64::NAN, s0, r2: 1.0 - rss / tss, n: sig.len() })
}

/// Log-corrected fit √(T−t)·g = C(−log(T−t) − s0)^p over the last `efolds` e-foldings
/// of T−t. For fixed T the model is linear (p = 1); T is found by golden search.
pub fn fit_log(rows: &[Observables], p: f64, efolds: f64) -> SimResult<FitResult> {
    let (last, x, g) = series(rows)?;
    let n = x.len();
    if n < 12 {
        return Err(SimError::WindowTooShort(format!("{n} samples")));
    }
    // self-similar estimate T − t ≈ 1/(2 d log g/dt) at the end
    let j = n - 1;
    let q = (g[j] / g[j - 1]).ln() / (x[j] - x[j - 1]);
    let mut tau = if q > 0.0 { 0.5 / q } else { -x[0] / 10.0 };
    let window = |tau: f64| -> Vec<usize> { (0..n).filter(|&j| tau - x[j] <= tau * efolds.exp()).collect() };
    let mut idx = window(tau);
    for _ in 0..10 {
        if idx.len() < 10 {
            return Err(SimError::WindowTooShort(format!("{} samples in the last {efolds} e-folds", idx.len())));
        }
        let lo = tau.ln() - 6.0;
        let hi = tau.ln() + 6.0;
        let (lt, _) = optimize::golden_min(|lt| log_model(&x, &g, &idx, lt.exp(), p).map(|e| e.rss).unwrap_or(f64::INFINITY), lo, hi, 1e-12);
        if (lt - lo).abs() < 1e-6 || (lt - hi).abs() < 1e-6 {
            return Err(SimError::DegenerateFit("blow-up time search hit its bracket".into()));
        }
        tau = lt.exp();
        let next = window(tau);
        if next == idx {
            break;
        }
        idx = next;
    }
    let e = log_model(&x, &g, &idx, tau, p).ok_or_else(|| SimError::DegenerateFit("log model failed".into()))?;
    if !(e.c > 0.0) {
        return Err(SimError::DegenerateFit(format!("non-positive C = {}", e.c)));
    }
    let span = ((tau - x[idx[0]]) / (tau - x[n - 1])).ln();
    if span < 0.5 * efolds {
        return Err(SimError::WindowTooShort(format!("window spans only {span:.2} e-folds")));
    }
    let half = idx.len() / 2;
    let split = match (log_model(&x, &g, &idx[..half], tau, p), log_model(&x, &g, &idx[half..], tau, p)) {
        (Some(a), Some(b)) => 0.5 * (a.c - b.c).abs(),
        _ => f64::NAN,
    };
    Ok(FitResult {
        kind: FitKind::LogFit,
        t_blowup: last.add(tau).hi,
        tau_last: tau,
        beta: None,
        beta_stderr: None,
        beta_uncertainty: None,
        c: Some(e.c),
        c_stderr: Some(e.c_stderr),
        c_uncertainty: Some(if e.c_stderr.is_finite() { e.c_stderr.hypot(split) } else { split }),
        s0: Some(e.s0),
        exponent: Some(p),
        residual: (e.rss / e.n as f64).sqrt(),
        r_squared: e.r2,
        window: FitWindow { t_start: last.add(x[idx[0]]).hi, t_end: last.hi, samples: e.n, log_span: span },
    })
}
