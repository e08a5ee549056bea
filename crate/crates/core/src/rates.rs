//! Reduced dynamics for the boundary-layer width ε(s), the coefficients a_n(s),
//! and the resulting blow-up rate laws.

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingConstants;
use crate::error::{Error, Result};
use crate::numerics::{dopri5, lsq};
use crate::params::{derive, eigenvalue, lambda_sign, ModelParams};
use crate::profile::ProfileSolution;
use crate::spectral::EigenBasis;

pub const DEFAULT_S_MAX: f64 = 60.0;
pub const DEFAULT_DS: f64 = 0.05;

/// Constants of γε̇ = −λε − (D c/h) ε^{1+δ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConstants {
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "DN")]
    pub d_n: f64,
    #[serde(rename = "cN")]
    pub c_n: f64,
    pub h: f64,
    pub delta: f64,
}

impl EpsilonConstants {
    pub fn coefficient(&self) -> f64 {
        self.d_n * self.c_n / self.h
    }

    pub fn rhs(&self, eps: f64) -> f64 {
        -(self.lambda * eps + self.coefficient() * eps.powf(1.0 + self.delta)) / self.gamma
    }

    /// C_N = (hγ/(c_N D_N δ))^{1/δ}.
    pub fn c_neutral(&self) -> f64 {
        (self.gamma / (self.coefficient() * self.delta)).powf(1.0 / self.delta)
    }

    /// Exact solution with ε(0) = ε₀, via z = ε^{−δ} which obeys ż = (δ/γ)(λz + Dc/h).
    pub fn closed_form(&self, eps0: f64, s: f64) -> f64 {
        let a = self.coefficient();
        let z0 = eps0.powf(-self.delta);
        let z = if self.lambda.abs() < crate::params::NEUTRAL_TOL {
            z0 + a * self.delta / self.gamma * s
        } else {
            let r = self.lambda * self.delta / self.gamma;
            (z0 + a / self.lambda) * (r * s).exp() - a / self.lambda
        };
        z.powf(-1.0 / self.delta)
    }

    /// Shift s₀ of the neutral closed form ε = C_N (s − s₀)^{−1/δ}.
    pub fn neutral_shift(&self, eps0: f64) -> f64 {
        -eps0.powf(-self.delta) * self.gamma / (self.coefficient() * self.delta)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonTrajectory {
    pub s: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub constants: EpsilonConstants,
    pub eps0: f64,
}

impl EpsilonTrajectory {
    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Cubic Hermite interpolation using the exact ODE slope at the samples.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.s.len();
        if s <= self.s[0] {
            return self.epsilon[0];
        }
        if s >= self.s[n - 1] {
            return self.epsilon[n - 1];
        }
        let i = match self.s.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.epsilon[i],
            Err(i) => i - 1,
        };
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let (e0, e1) = (self.epsilon[i], self.epsilon[i + 1]);
        let (m0, m1) = (self.constants.rhs(e0), self.constants.rhs(e1));
        let hh = s1 - s0;
        let t = (s - s0) / hh;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * e0 + (t3 - 2.0 * t2 + t) * hh * m0 + (-2.0 * t3 + 3.0 * t2) * e1 + (t3 - t2) * hh * m1
    }

    /// Maximum relative deviation from the closed form over samples in [a, b].
    pub fn closed_form_error(&self, a: f64, b: f64) -> f64 {
        self.s
            .iter()
            .zip(&self.epsilon)
            .filter(|(s, _)| **s >= a && **s <= b)
            .map(|(&s, &e)| {
                let c = self.constants.closed_form(self.eps0, s);
                ((e - c) / c).abs()
            })
            .fold(0.0, f64::max)
    }

    fn late_window(&self) -> (Vec<f64>, Vec<f64>) {
        let half = self.s_max() / 2.0;
        self.s.iter().zip(&self.epsilon).filter(|(s, _)| **s >= half).map(|(s, e)| (*s, *e)).unzip()
    }

    /// Line fit of ε^{−δ} against s over the last half of the trajectory.
    pub fn fit_neutral(&self) -> Option<NeutralFit> {
        let (s, e) = self.late_window();
        let z: Vec<f64> = e.iter().map(|e| e.powf(-self.constants.delta)).collect();
        let f = lsq::line_fit(&s, &z)?;
        Some(NeutralFit {
            slope: f.slope,
            s0: -f.intercept / f.slope,
            c_fit: f.slope.powf(-1.0 / self.constants.delta),
        })
    }

    /// Slope of log ε against s over the last half of the trajectory.
    pub fn fit_log_slope(&self) -> Option<f64> {
        let (s, e) = self.late_window();
        let l: Vec<f64> = e.iter().map(|e| e.ln()).collect();
        lsq::line_fit(&s, &l).map(|f| f.slope)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NeutralFit {
    pub slope: f64,
    pub s0: f64,
    #[serde(rename = "CFit")]
    pub c_fit: f64,
}

pub fn solve_epsilon(c: &EpsilonConstants, eps0: f64, s_max: f64) -> Result<EpsilonTrajectory> {
    solve_epsilon_sampled(c, eps0, s_max, DEFAULT_DS)
}

pub fn solve_epsilon_sampled(c: &EpsilonConstants, eps0: f64, s_max: f64, ds: f64) -> Result<EpsilonTrajectory> {
    if c.lambda < -crate::params::NEUTRAL_TOL {
        return Err(Error::NegativeEigenvalue { n: usize::MAX, lambda: c.lambda });
    }
    if !(eps0 > 0.0 && eps0 <= 0.1) {
        return Err(Error::InvalidParams(format!("eps0 must lie in (0, 0.1], got {eps0}")));
    }
    if !(s_max > 0.0 && ds > 0.0) {
        return Err(Error::InvalidParams("sMax and ds must be positive".into()));
    }
    let m = (s_max / ds).round().max(1.0) as usize;
    let outputs: Vec<f64> = (0..=m).map(|i| s_max * i as f64 / m as f64).collect();
    let opts = dopri5::Options { rtol: 1e-12, atol: 1e-300, ..Default::default() };
    let sol = dopri5::solve(|_, y, dy| dy[0] = c.rhs(y[0]), 0.0, &[eps0], &outputs, &opts)?;
    let epsilon: Vec<f64> = sol.y.iter().map(|y| y[0]).collect();
    for (s, w) in outputs.windows(2).zip(epsilon.windows(2)) {
        if !(w[1] > 0.0) || w[1] > w[0] {
            return Err(Error::BlowupOfEpsilon { s: s[1] });
        }
    }
    Ok(EpsilonTrajectory { s: outputs, epsilon, constants: *c, eps0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateKind {
    Power,
    Logarithmic,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateConstants {
    pub h: f64,
    #[serde(rename = "Cs")]
    pub cs: f64,
    #[serde(rename = "cN")]
    pub c_n: f64,
    #[serde(rename = "DN")]
    pub d_n: Option<f64>,
    pub delta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub lambda: f64,
    pub beta: f64,
    #[serde(rename = "CN")]
    pub c_neutral: Option<f64>,
}

/// Predicted rate law R_N(t).
///
/// Power: R = prefactor·ε₀·(T−t)^{exponent} with ε₀ free.
/// Logarithmic: R = prefactor·(T−t)^{1/2}/(−log(T−t) − s₀)^{exponent} with s₀ free.
#[derive(Debug, Clone, Serialize)]
pub struct RateLaw {
    pub kind: RateKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub exponent: f64,
    pub prefactor: f64,
    #[serde(rename = "freeParameter")]
    pub free_parameter: &'static str,
    pub constants: RateConstants,
    /// Logarithmic, δ = 1 only: predicted slope of √(T−t)·∂_ru(0,t) against −log(T−t),
    /// which equals 1/prefactor.
    #[serde(rename = "gradientSlope")]
    pub gradient_slope: Option<f64>,
}

impl RateLaw {
    /// R_N at time-to-blowup τ for the given free parameter (ε₀ or s₀).
    pub fn rate(&self, tau: f64, free: f64) -> f64 {
        match self.kind {
            RateKind::Power => self.prefactor * free * tau.powf(self.exponent),
            RateKind::Logarithmic => self.prefactor * tau.sqrt() / (-tau.ln() - free).powf(self.exponent),
        }
    }
}

pub fn predict_rate(
    params: &ModelParams,
    n: usize,
    profile: &ProfileSolution,
    basis: &EigenBasis,
    coupling: Option<&CouplingConstants>,
) -> Result<RateLaw> {
    let c = derive(params)?;
    let e = eigenvalue(params, n)?;
    let sign = lambda_sign(params, n)?;
    if sign == std::cmp::Ordering::Less {
        return Err(Error::NegativeEigenvalue { n, lambda: e.lambda });
    }
    if n > basis.max_n {
        return Err(Error::InvalidParams(format!("basis built up to n={} only", basis.max_n)));
    }
    let d_n = coupling.map(|cc| {
        if cc.n_index != n {
            Err(Error::InvalidParams(format!("coupling computed for N={}, requested N={n}", cc.n_index)))
        } else {
            Ok(cc.d_n())
        }
    });
    let d_n = d_n.transpose()?;
    let mut constants = RateConstants {
        h: profile.h,
        cs: profile.cs,
        c_n: basis.c_origin[n],
        d_n,
        delta: c.delta,
        gamma: c.gamma,
        omega: c.omega,
        lambda: e.lambda,
        beta: e.beta,
        c_neutral: None,
    };
    if sign == std::cmp::Ordering::Greater {
        return Ok(RateLaw {
            kind: RateKind::Power,
            n,
            exponent: 0.5 + e.beta,
            prefactor: profile.cs,
            free_parameter: "epsilon0",
            constants,
            gradient_slope: None,
        });
    }
    let d_n = d_n.ok_or_else(|| Error::InvalidParams("neutral rate law requires coupling constants".into()))?;
    if !(d_n > 0.0) {
        return Err(Error::InvalidParams(format!("neutral rate law requires D_N > 0, got {d_n}")));
    }
    let ec = EpsilonConstants { lambda: 0.0, gamma: c.gamma, d_n, c_n: basis.c_origin[n], h: profile.h, delta: c.delta };
    let cn = ec.c_neutral();
    constants.c_neutral = Some(cn);
    let prefactor = profile.cs * cn;
    Ok(RateLaw {
        kind: RateKind::Logarithmic,
        n,
        exponent: 1.0 / c.delta,
        prefactor,
        free_parameter: "s0",
        constants,
        gradient_slope: ((c.delta - 1.0).abs() < 1e-12).then(|| 1.0 / prefactor),
    })
}

/// Constants of the a_n system for n in `n_range`.
#[derive(Debug, Clone)]
pub struct FlowConstants {
    pub big_n: usize,
    pub lambdas: Vec<f64>,
    pub d: Vec<f64>,
    pub c_n: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientFlow {
    pub s: Vec<f64>,
    pub n: Vec<usize>,
    /// a[i][j] = a_{n[i]}(s[j]).
    pub a: Vec<Vec<f64>>,
    /// Matched a_N(s) = −(h/c_N) ε(s)^γ.
    #[serde(rename = "aMatched")]
    pub a_matched: Vec<f64>,
}

impl CoefficientFlow {
    pub fn ratio(&self, i: usize) -> Vec<f64> {
        self.a[i].iter().zip(&self.a_matched).map(|(a, m)| (a / m).abs()).collect()
    }
}

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn gl4<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    GL4.iter().map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// ∫_s^∞ ε(q)^p e^{λ(q−s)} dq for λ < 0, along the trajectory with an exponential tail beyond sMax.
fn backward_integrals(traj: &EpsilonTrajectory, p: f64, lambda: f64) -> Vec<f64> {
    let s = &traj.s;
    let m = s.len();
    let e_end = traj.epsilon[m - 1];
    let ec = &traj.constants;
    let decay = p * (ec.lambda + ec.coefficient() * e_end.powf(ec.delta)) / ec.gamma;
    let mut out = vec![0.0; m];
    out[m - 1] = e_end.powf(p) / (decay - lambda);
    for j in (0..m - 1).rev() {
        let (a, b) = (s[j], s[j + 1]);
        let piece = gl4(|q| traj.eval(q).powf(p) * (lambda * (q - a)).exp(), a, b);
        out[j] = piece + (lambda * (b - a)).exp() * out[j + 1];
    }
    out
}

/// ∫₀^s ε(q)^p e^{−λ(s−q)} dq along the trajectory.
fn forward_integrals(traj: &EpsilonTrajectory, p: f64, lambda: f64) -> Vec<f64> {
    let s = &traj.s;
    let mut out = vec![0.0; s.len()];
    for j in 1..s.len() {
        let (a, b) = (s[j - 1], s[j]);
        let piece = gl4(|q| traj.eval(q).powf(p) * (-lambda * (b - q)).exp(), a, b);
        out[j] = (-lambda * (b - a)).exp() * out[j - 1] + piece;
    }
    out
}

/// Initial values a_n(0) = −D_n ∫₀^∞ ε^{γ+δ} e^{λ_n q} dq that suppress the unstable modes n < N.
pub fn suppression_initial_value(traj: &EpsilonTrajectory, lambda_n: f64, d_n: f64) -> f64 {
    let p = traj.constants.gamma + traj.constants.delta;
    -d_n * backward_integrals(traj, p, lambda_n)[0]
}

/// a_n(s) = a_n(0)e^{−λ_n s} + D_n ∫₀^s ε^{γ+δ} e^{−λ_n(s−q)} dq on the trajectory samples.
///
/// For λ_n < 0 the equivalent form (a_n(0) + D_n∫₀^∞)e^{−λ_n s} − D_n∫_s^∞ is used.
pub fn coefficient_flow(fc: &FlowConstants, traj: &EpsilonTrajectory, a0: &[f64], n_range: &[usize]) -> Result<CoefficientFlow> {
    if a0.len() != n_range.len() {
        return Err(Error::InvalidParams("one initial value per mode required".into()));
    }
    let ec = &traj.constants;
    let p = ec.gamma + ec.delta;
    let mut a = Vec::with_capacity(n_range.len());
    for (&n, &a_init) in n_range.iter().zip(a0) {
        let lam = *fc.lambdas.get(n).ok_or_else(|| Error::InvalidParams(format!("no eigenvalue for n={n}")))?;
        let dn = *fc.d.get(n).ok_or_else(|| Error::InvalidParams(format!("no coupling constant for n={n}")))?;
        let row: Vec<f64> = if lam < 0.0 {
            let back = backward_integrals(traj, p, lam);
            let bracket = a_init + dn * back[0];
            traj.s.iter().zip(&back).map(|(s, b)| bracket * (-lam * s).exp() - dn * b).collect()
        } else {
            let fwd = forward_integrals(traj, p, lam);
            traj.s.iter().zip(&fwd).map(|(s, f)| a_init * (-lam * s).exp() + dn * f).collect()
        };
        a.push(row);
    }
    let a_matched = traj.epsilon.iter().map(|e| -(fc.h / fc.c_n) * e.powf(ec.gamma)).collect();
    Ok(CoefficientFlow { s: traj.s.clone(), n: n_range.to_vec(), a, a_matched })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Codimension {
    pub constraints: usize,
    #[serde(rename = "effectiveUnstable")]
    pub effective_unstable: usize,
}

pub fn codimension(params: &ModelParams, n: usize) -> Result<Codimension> {
    if lambda_sign(params, n)? == std::cmp::Ordering::Less {
        return Err(Error::NegativeEigenvalue { n, lambda: eigenvalue(params, n)?.lambda });
    }
    Ok(Codimension { constraints: n, effective_unstable: n.saturating_sub(1) })
}

#[derive(Debug, Clone, Serialize)]
pub struct AnsatzSnapshot {
    pub s: Option<f64>,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
    /// |f_inn(K) − f_out(K)|.
    pub jump: f64,
}

impl AnsatzSnapshot {
    pub fn inner_domain(&self) -> (f64, f64) {
        (0.0, self.k)
    }

    pub fn outer_domain(&self) -> (f64, f64) {
        (self.k, f64::INFINITY)
    }
}

/// Inner branch U*(y/ε).
pub fn ansatz_inner(profile: &ProfileSolution, eps: f64, y: f64) -> f64 {
    profile.eval_u(y / eps)
}

/// Outer branch π/2 − (h/c_N) ε^γ φ_N(y).
pub fn ansatz_outer(profile: &ProfileSolution, basis: &EigenBasis, n: usize, eps: f64, y: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 - profile.h / basis.c_origin[n] * eps.powf(basis.constants.gamma) * basis.phi(n, y)
}

pub fn assemble_ansatz(profile: &ProfileSolution, basis: &EigenBasis, n: usize, eps: f64, y: &[f64]) -> Result<AnsatzSnapshot> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 0.1], got {eps}")));
    }
    if n > basis.max_n {
        return Err(Error::InvalidParams(format!("basis built up to n={} only", basis.max_n)));
    }
    let k = eps.sqrt();
    let f = y
        .iter()
        .map(|&y| if y <= k { ansatz_inner(profile, eps, y) } else { ansatz_outer(profile, basis, n, eps, y) })
        .collect();
    let jump = (ansatz_inner(profile, eps, k) - ansatz_outer(profile, basis, n, eps, k)).abs();
    Ok(AnsatzSnapshot { s: None, epsilon: eps, k, n, y: y.to_vec(), f, jump })
}

/// Upstream pipeline for one (d, k, N).
#[derive(Debug, Clone)]
pub struct Prediction {
    pub params: ModelParams,
    pub n: usize,
    pub profile: ProfileSolution,
    pub basis: EigenBasis,
    pub coupling: Option<CouplingConstants>,
    pub rate: RateLaw,
}

/// Runs profile, spectral basis, coupling and rate prediction. N defaults to the
/// neutral index when it exists, otherwise the smallest index with λ_N > 0.
pub fn predict(params: &ModelParams, n: Option<usize>) -> Result<Prediction> {
    let cls = crate::params::classify(params)?;
    let n = n.or(params.n).unwrap_or(cls.min_admissible_n);
    let profile = crate::profile::solve_profile(params, &Default::default())?;
    let basis = crate::spectral::build_basis(params, (n + 2).max(4))?;
    let coupling = match crate::coupling::coupling_constants(&profile, &basis, n, n + 2) {
        Ok(c) => Some(c),
        Err(Error::DegenerateRegime) if lambda_sign(params, n)? == std::cmp::Ordering::Greater => None,
        Err(e) => return Err(e),
    };
    let rate = predict_rate(params, n, &profile, &basis, coupling.as_ref())?;
    Ok(Prediction { params: *params, n, profile, basis, coupling, rate })
}

impl Prediction {
    pub fn epsilon_constants(&self) -> Option<EpsilonConstants> {
        let cc = self.coupling.as_ref()?;
        Some(EpsilonConstants {
            lambda: self.basis.lambda(self.n),
            gamma: self.basis.constants.gamma,
            d_n: cc.d_n(),
            c_n: self.basis.c_origin[self.n],
            h: self.profile.h,
            delta: self.basis.constants.delta,
        })
    }

    pub fn flow_constants(&self) -> Option<FlowConstants> {
        let cc = self.coupling.as_ref()?;
        Some(FlowConstants {
            big_n: self.n,
            lambdas: (0..cc.d.len()).map(|i| self.basis.lambda(i)).collect(),
            d: cc.d.clone(),
            c_n: self.basis.c_origin[self.n],
            h: self.profile.h,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn neutral() -> EpsilonConstants {
        EpsilonConstants { lambda: 0.0, gamma: 2.0, d_n: 1.5, c_n: 0.65, h: 2.69, delta: 1.0 }
    }

    fn rk4_oracle(c: &EpsilonConstants, eps0: f64, s: f64, steps: usize) -> f64 {
        let hh = s / steps as f64;
        let mut e = eps0;
        for _ in 0..steps {
            let k1 = c.rhs(e);
            let k2 = c.rhs(e + 0.5 * hh * k1);
            let k3 = c.rhs(e + 0.5 * hh * k2);
            let k4 = c.rhs(e + hh * k3);
            e += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        e
    }

    #[test]
    fn linear_case_is_exponential() {
        let c = EpsilonConstants { lambda: 0.3, gamma: 1.5, d_n: 0.0, c_n: 1.0, h: 1.0, delta: 2.0 };
        let t = solve_epsilon(&c, 0.05, 40.0).unwrap();
        for (s, e) in t.s.iter().zip(&t.epsilon) {
            let exact = 0.05 * (-0.3 / 1.5 * s).exp();
            assert!(((e - exact) / exact).abs() < 1e-9);
        }
    }

    #[test]
    fn neutral_matches_closed_form_and_shift() {
        let c = neutral();
        let t = solve_epsilon(&c, 0.1, DEFAULT_S_MAX).unwrap();
        assert!(t.closed_form_error(5.0, 50.0) < 1e-6);
        let fit = t.fit_neutral().unwrap();
        let s0 = c.neutral_shift(0.1);
        assert!((fit.s0 - s0).abs() < 1e-6);
        assert!((fit.c_fit / c.c_neutral() - 1.0).abs() < 1e-8);
        for &s in &[10.0, 30.0] {
            let cf = c.c_neutral() * (s - s0).powf(-1.0);
            assert!((t.eval(s) / cf - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_against_rk4() {
        for c in [neutral(), EpsilonConstants { lambda: 0.2, delta: 2.5, ..neutral() }] {
            let e = rk4_oracle(&c, 0.08, 20.0, 20000);
            assert!((c.closed_form(0.08, 20.0) / e - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_lambda_and_growth_rejected() {
        let c = EpsilonConstants { lambda: -1.0, ..neutral() };
        assert!(matches!(solve_epsilon(&c, 0.01, 10.0), Err(Error::NegativeEigenvalue { .. })));
        let c = EpsilonConstants { d_n: -1.0, ..neutral() };
        assert!(matches!(solve_epsilon(&c, 0.01, 10.0), Err(Error::BlowupOfEpsilon { .. })));
        assert!(solve_epsilon(&neutral(), 0.2, 10.0).is_err());
    }

    #[test]
    fn power_log_slope() {
        let c = EpsilonConstants { lambda: 0.2071, gamma: 1.5858, delta: 2.8284, ..neutral() };
        let t = solve_epsilon(&c, 0.1, DEFAULT_S_MAX).unwrap();
        assert!((t.fit_log_slope().unwrap() + c.lambda / c.gamma).abs() < 1e-4);
    }

    #[test]
    fn flow_trivial_and_matched() {
        let c = neutral();
        let t = solve_epsilon(&c, 0.05, 20.0).unwrap();
        let fc = FlowConstants { big_n: 1, lambdas: vec![-1.0, 0.0, 1.0], d: vec![0.0, 0.0, 0.0], c_n: c.c_n, h: c.h };
        let fl = coefficient_flow(&fc, &t, &[1.0], &[2]).unwrap();
        for (s, a) in fl.s.iter().zip(&fl.a[0]) {
            assert!((a - (-s).exp()).abs() < 1e-14);
        }
        for (e, m) in t.epsilon.iter().zip(&fl.a_matched) {
            assert!((c.c_n * m + c.h * e.powf(c.gamma)).abs() < 1e-15);
        }
    }

    #[test]
    fn flow_quadrature_against_ode() {
        let c = neutral();
        let t = solve_epsilon(&c, 0.05, 20.0).unwrap();
        let fc = FlowConstants { big_n: 1, lambdas: vec![-1.0, 0.0, 1.0], d: vec![0.7, 0.0, 0.4], c_n: c.c_n, h: c.h };
        let fl = coefficient_flow(&fc, &t, &[0.3], &[2]).unwrap();
        let p = c.gamma + c.delta;
        let sol = dopri5::solve(
            |_, y, dy| {
                dy[0] = c.rhs(y[0]);
                dy[1] = -y[1] + 0.4 * y[0].powf(p);
            },
            0.0,
            &[0.05, 0.3],
            &[20.0],
            &dopri5::Options::default(),
        )
        .unwrap();
        assert!((fl.a[0].last().unwrap() / sol.y[0][1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn codimension_counts() {
        assert_eq!(codimension(&ModelParams::new(7.0, 1), 1).unwrap().effective_unstable, 0);
        assert_eq!(codimension(&ModelParams::new(12.0, 2), 2).unwrap().effective_unstable, 1);
        assert!(matches!(codimension(&ModelParams::new(7.0, 1), 0), Err(Error::NegativeEigenvalue { .. })));
        for k in 2..5u32 {
            for d in [crate::params::d_star(k) + 0.5, 20.0 + 3.0 * k as f64] {
                let p = ModelParams::new(d, k);
                let n = crate::params::classify(&p).unwrap().min_admissible_n;
                assert!(codimension(&p, n).unwrap().effective_unstable >= 1, "k={k} d={d}");
            }
        }
    }

    proptest! {
        #[test]
        fn closed_form_satisfies_ode(lambda in 0.0f64..1.0, delta in 0.3f64..3.0, a in 0.1f64..5.0, eps0 in 1e-4f64..0.1, s in 0.5f64..40.0) {
            let c = EpsilonConstants { lambda, gamma: 1.7, d_n: a, c_n: 1.0, h: 1.0, delta };
            let e = c.closed_form(eps0, s);
            let hh = 1e-4 * s;
            let de = (c.closed_form(eps0, s + hh) - c.closed_form(eps0, s - hh)) / (2.0 * hh);
            prop_assert!(e > 0.0 && e < eps0);
            prop_assert!((de - c.rhs(e)).abs() <= 1e-6 * c.rhs(e).abs() + 1e-300);
        }

        #[test]
        fn trajectory_decreasing(lambda in 0.0f64..1.0, a in 0.1f64..5.0, eps0 in 1e-3f64..0.1) {
            let c = EpsilonConstants { lambda, gamma: 2.0, d_n: a, c_n: 1.0, h: 1.0, delta: 1.0 };
            let t = solve_epsilon_sampled(&c, eps0, 20.0, 0.5).unwrap();
            prop_assert!(t.epsilon.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        }
    }
}
