//! Rate prediction for (d, k, N) with the full constants table.

use std::fmt::Write as _;

use blowuplab_core::params::{self, ModelParams, Regime, SpectrumEntry};
use blowuplab_core::rates::{self, RateKind, RateLaw};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantsTable {
    pub d: f64,
    pub k: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub gamma: f64,
    pub omega: f64,
    pub delta: f64,
    pub regime: Regime,
    pub spectrum: Vec<SpectrumEntry>,
    pub h: f64,
    #[serde(rename = "Cs")]
    pub cs: f64,
    #[serde(rename = "cN")]
    pub c_n: f64,
    #[serde(rename = "DN")]
    pub d_n: Option<f64>,
    #[serde(rename = "CN")]
    pub c_neutral: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictReport {
    pub warnings: Vec<String>,
    pub constants: ConstantsTable,
    pub rate: RateLaw,
}

pub fn predict_report(d: f64, k: u32, n: Option<usize>) -> CliResult<PredictReport> {
    let p = ModelParams::new(d, k);
    let mut warnings = Vec::new();
    if !p.is_integer_dimension() {
        warnings.push(format!("d={d} is not an integer; the flow is geometric only for integer d"));
    }
    let pred = rates::predict(&p, n)?;
    let c = &pred.basis.constants;
    let spectrum = (0..=pred.n + 2).map(|i| params::eigenvalue(&p, i)).collect::<Result<Vec<_>, _>>()?;
    let rc = &pred.rate.constants;
    let constants = ConstantsTable {
        d,
        k,
        n: pred.n,
        gamma: c.gamma,
        omega: c.omega,
        delta: c.delta,
        regime: c.regime,
        spectrum,
        h: rc.h,
        cs: rc.cs,
        c_n: rc.c_n,
        d_n: rc.d_n,
        c_neutral: rc.c_neutral,
    };
    Ok(PredictReport { warnings, constants, rate: pred.rate })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.10}")).unwrap_or_else(|| "-".into())
}

pub fn render(r: &PredictReport) -> String {
    let c = &r.constants;
    let mut s = String::new();
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s, "d = {}  k = {}  N = {}  regime = {:?}", c.d, c.k, c.n, c.regime);
    for (name, v) in [("gamma", c.gamma), ("omega", c.omega), ("delta", c.delta), ("h", c.h), ("Cs", c.cs), ("cN", c.c_n)] {
        let _ = writeln!(s, "  {name:<6} {v:.10}");
    }
    let _ = writeln!(s, "  {:<6} {}", "DN", opt(c.d_n));
    let _ = writeln!(s, "  {:<6} {}", "CN", opt(c.c_neutral));
    for e in &c.spectrum {
        let _ = writeln!(s, "  lambda_{} = {:.10}  beta_{} = {:.10}", e.n, e.lambda, e.n, e.beta);
    }
    let law = &r.rate;
    match law.kind {
        RateKind::Power => {
            let _ = writeln!(s, "rate: Power  R(t) = {:.10} * eps0 * (T-t)^{:.10}", law.prefactor, law.exponent);
        }
        RateKind::Logarithmic => {
            let _ = writeln!(s, "rate: Logarithmic  R(t) = {:.10} * (T-t)^(1/2) / (-log(T-t) - s0)^{:.10}", law.prefactor, law.exponent);
        }
    }
    if let Some(g) = law.gradient_slope {
        let _ = writeln!(s, "  slope of sqrt(T-t) d_r u(0,t) against -log(T-t): {g:.10}");
    }
    s
}
