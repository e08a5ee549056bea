//! Quadrature: generalized Gauss-Laguerre rules and adaptive integration.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLaguerre;
use statrs::function::gamma::ln_gamma;

use super::laguerre::laguerre;
use crate::error::{Error, Result};

/// Gauss rule for the weight z^alpha e^{-z} on [0, inf).
#[derive(Debug, Clone)]
pub struct LaguerreRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LaguerreRule {
    /// Nodes come from the Golub-Welsch eigenvalues, are polished by Newton's
    /// method and weights are recomputed from the derivative formula, which keeps
    /// relative accuracy for the tiny weights at large nodes.
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let base = GaussLaguerre::new(n, alpha)
            .map_err(|e| Error::Integrator(format!("Gauss-Laguerre rule: {e}")))?;
        let ln_norm = ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&x0, _) in base.as_node_weight_pairs().iter().map(|(x, w)| (x, w)) {
            let mut x = x0;
            for _ in 0..4 {
                let p = laguerre(n, alpha, x);
                let dp = -laguerre(n - 1, alpha + 1.0, x);
                if dp == 0.0 || !dp.is_finite() {
                    break;
                }
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs() {
                    break;
                }
            }
            let dp = laguerre(n - 1, alpha + 1.0, x);
            let lw = ln_norm - x.ln() - 2.0 * dp.abs().ln();
            nodes.push(x);
            weights.push(lw.exp());
        }
        Ok(Self { alpha, nodes, weights })
    }

    /// Shared copy of the rule, built once per (n, alpha).
    pub fn cached(n: usize, alpha: f64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<LaguerreRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (n, alpha.to_bits());
        if let Some(r) = cache.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let rule = Arc::new(Self::new(n, alpha)?);
        cache.lock().unwrap().insert(key, rule.clone());
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of w_i f(z_i), approximating the integral of z^alpha e^{-z} f(z).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| if w > 0.0 { w * f(z) } else { 0.0 }).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
}

/// Adaptive double-exponential quadrature on [a, b] with bisection until the
/// absolute target is met.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Adaptive {
    adaptive_rec(f, a, b, tol, 0)
}

fn adaptive_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Adaptive {
    let o = quadrature::integrate(f, a, b, tol);
    if o.error_estimate <= tol.max(1e-13 * o.integral.abs()) || depth >= 8 {
        return Adaptive { value: o.integral, error: o.error_estimate };
    }
    let m = 0.5 * (a + b);
    let l = adaptive_rec(f, a, m, 0.5 * tol, depth + 1);
    let r = adaptive_rec(f, m, b, 0.5 * tol, depth + 1);
    Adaptive { value: l.value + r.value, error: l.error + r.error }
}

/// Integral over [a, b] split into `panels` equal pieces, each adaptive.
pub fn adaptive_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, tol: f64) -> Adaptive {
    let h = (b - a) / panels as f64;
    let mut acc = Adaptive { value: 0.0, error: 0.0 };
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == panels { b } else { lo + h };
        let r = adaptive(f, lo, hi, tol / panels as f64);
        acc.value += r.value;
        acc.error += r.error;
    }
    acc
}

/// Composite Gauss-Legendre rule with `panels` panels of `order` points.
pub fn gauss_legendre_panels<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = gauss_quad::GaussLegendre::new(order).expect("Gauss-Legendre order >= 2");
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        total += rule.integrate(lo, lo + h, &mut f);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn laguerre_moments_exact() {
        for &alpha in &[0.0, 0.5, 2.0616, -0.5] {
            let rule = LaguerreRule::new(20, alpha).unwrap();
            for m in 0..39 {
                let v = rule.integrate(|z| z.powi(m));
                let exact = (ln_gamma(alpha + m as f64 + 1.0)).exp();
                assert!(((v - exact) / exact).abs() < 1e-11, "alpha={alpha} m={m}");
            }
        }
    }

    #[test]
    fn large_rule_is_stable() {
        let rule = LaguerreRule::new(200, 0.5).unwrap();
        let v = rule.integrate(|z| z.powi(17));
        let exact = gamma(18.5);
        assert!(((v - exact) / exact).abs() < 1e-10);
        assert!((rule.integrate(|_| 1.0) - gamma(1.5)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_matches_closed_forms() {
        let r = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
        let g = gauss_legendre_panels(|x| x.exp(), 0.0, 2.0, 8, 10);
        assert!((g - (2f64.exp() - 1.0)).abs() < 1e-13);
    }
}
