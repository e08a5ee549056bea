//! Parameter space (d, k, N) and the closed-form constants derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on |N0 - round(N0)| for neutral-index detection.
pub const NEUTRAL_TOL: f64 = 1e-12;

/// Relative tolerance on |omega - 2 gamma| used to flag the degenerate regime.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: f64,
    pub k: u32,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl ModelParams {
    pub fn new(d: f64, k: u32) -> Self {
        Self { d, k, n: None }
    }

    pub fn with_n(d: f64, k: u32, n: usize) -> Self {
        Self { d, k, n: Some(n) }
    }

    /// Prefactor k(d+k-2) of the sine term.
    pub fn kappa(&self) -> f64 {
        let k = self.k as f64;
        k * (self.d + k - 2.0)
    }

    /// Critical dimension d* = 2 + k(2 + 2 sqrt 2).
    pub fn d_star(&self) -> f64 {
        d_star(self.k)
    }

    pub fn is_integer_dimension(&self) -> bool {
        (self.d - self.d.round()).abs() < 1e-12
    }
}

pub fn d_star(k: u32) -> f64 {
    2.0 + k as f64 * (2.0 + 2.0 * std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    InnerDominated,
    OuterDominated,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub omega: f64,
    pub gamma: f64,
    #[serde(rename = "dStar")]
    pub d_star: f64,
    pub delta: f64,
    #[serde(rename = "muPlus")]
    pub mu_plus: f64,
    #[serde(rename = "muMinus")]
    pub mu_minus: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub n: usize,
    pub lambda: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    #[serde(rename = "neutralIndex")]
    pub neutral_index: Option<usize>,
    #[serde(rename = "minAdmissibleN")]
    pub min_admissible_n: usize,
    /// N - 1 for the requested N (None when no N was given).
    #[serde(rename = "unstableDirections")]
    pub unstable_directions: Option<usize>,
    /// (d-2-omega)/4, the index at which lambda crosses zero.
    #[serde(rename = "zeroCrossing")]
    pub zero_crossing: f64,
    /// Whether (d-2-omega)/4 > k/2 holds.
    #[serde(rename = "stabilityBoundHolds")]
    pub stability_bound_holds: bool,
}

fn check_basic(p: &ModelParams) -> Result<()> {
    if !p.d.is_finite() {
        return Err(Error::InvalidParams(format!("d={} is not finite", p.d)));
    }
    if p.k == 0 {
        return Err(Error::InvalidParams("k must be a positive integer".into()));
    }
    Ok(())
}

pub fn derive(p: &ModelParams) -> Result<DerivedConstants> {
    check_basic(p)?;
    let k = p.k as f64;
    let ds = p.d_star();
    let disc = (p.d - 2.0 * (k + 1.0)).powi(2) - 8.0 * k * k;
    if p.d <= ds || disc <= 0.0 {
        return Err(Error::SubcriticalDimension { d: p.d, k: p.k, d_star: ds });
    }
    let omega = disc.sqrt();
    let gamma = 0.5 * (p.d - 2.0 - omega);
    let lhs = p.d - 2.0 - gamma;
    let rhs = gamma + omega;
    assert!(
        (lhs - rhs).abs() <= 4.0 * f64::EPSILON * lhs.abs().max(1.0),
        "identity d-2-gamma = gamma+omega violated"
    );
    let regime = if (omega - 2.0 * gamma).abs() <= DEGENERATE_TOL * omega.max(1.0) {
        Regime::Degenerate
    } else if omega < 2.0 * gamma {
        Regime::InnerDominated
    } else {
        Regime::OuterDominated
    };
    Ok(DerivedConstants {
        omega,
        gamma,
        d_star: ds,
        delta: omega.min(2.0 * gamma),
        mu_plus: -gamma,
        mu_minus: -gamma - omega,
        regime,
    })
}

pub fn eigenvalue(p: &ModelParams, n: usize) -> Result<SpectrumEntry> {
    let c = derive(p)?;
    Ok(spectrum_entry(p, &c, n))
}

pub(crate) fn spectrum_entry(p: &ModelParams, c: &DerivedConstants, n: usize) -> SpectrumEntry {
    let nf = n as f64;
    SpectrumEntry {
        n,
        lambda: -0.5 * c.gamma + nf,
        beta: -0.5 + 2.0 * nf / (p.d - 2.0 - c.omega),
    }
}

pub fn classify(p: &ModelParams) -> Result<Classification> {
    let c = derive(p)?;
    let n0 = 0.25 * (p.d - 2.0 - c.omega);
    let rounded = n0.round();
    let neutral_index = if (n0 - rounded).abs() < NEUTRAL_TOL {
        Some(rounded as usize)
    } else {
        None
    };
    let min_admissible_n = match neutral_index {
        Some(n) => n,
        None => n0.ceil() as usize,
    };
    Ok(Classification {
        neutral_index,
        min_admissible_n,
        unstable_directions: p.n.map(|n| n.saturating_sub(1)),
        zero_crossing: n0,
        stability_bound_holds: n0 > 0.5 * p.k as f64,
    })
}

/// Sign of lambda_N with the neutral tolerance applied.
pub fn lambda_sign(p: &ModelParams, n: usize) -> Result<std::cmp::Ordering> {
    let e = eigenvalue(p, n)?;
    Ok(if e.lambda.abs() < NEUTRAL_TOL {
        std::cmp::Ordering::Equal
    } else if e.lambda > 0.0 {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn d7_k1_constants() {
        let c = derive(&ModelParams::new(7.0, 1)).unwrap();
        assert_eq!(c.omega, 1.0);
        assert_eq!(c.gamma, 2.0);
        assert_eq!(c.delta, 1.0);
        assert_eq!(c.regime, Regime::InnerDominated);
        let p = ModelParams::new(7.0, 1);
        assert_eq!(eigenvalue(&p, 0).unwrap().lambda, -1.0);
        let e1 = eigenvalue(&p, 1).unwrap();
        assert_eq!(e1.lambda, 0.0);
        assert_eq!(e1.beta, 0.0);
    }

    #[test]
    fn d12_k2_constants() {
        let p = ModelParams::with_n(12.0, 2, 2);
        let c = derive(&p).unwrap();
        assert_eq!(c.omega, 2.0);
        assert_eq!(c.gamma, 4.0);
        assert_eq!(c.delta, 2.0);
        assert_eq!(c.regime, Regime::InnerDominated);
        let cl = classify(&p).unwrap();
        assert_eq!(cl.neutral_index, Some(2));
        assert_eq!(cl.unstable_directions, Some(1));
    }

    #[test]
    fn d9_k1_outer_regime() {
        let c = derive(&ModelParams::new(9.0, 1)).unwrap();
        // 17^(1/2) and (7 - 17^(1/2))/2 from an independent evaluation
        rel(c.omega, 4.123105625617661, 1e-15);
        rel(c.gamma, 1.4384471871911697, 1e-15);
        rel(c.delta, 2.8768943743823393, 1e-15);
        assert_eq!(c.regime, Regime::OuterDominated);
    }

    #[test]
    fn d8_beta1() {
        let e = eigenvalue(&ModelParams::new(8.0, 1), 1).unwrap();
        let oracle = -0.5 + 2.0 / (6.0 - 2.0 * 2f64.sqrt());
        rel(e.beta, oracle, 1e-15);
        assert!((e.beta - 0.1306019).abs() < 5e-8);
        rel(e.beta, e.lambda / derive(&ModelParams::new(8.0, 1)).unwrap().gamma, 1e-14);
    }

    #[test]
    fn classification_examples() {
        let c7 = classify(&ModelParams::with_n(7.0, 1, 1)).unwrap();
        assert_eq!(c7.neutral_index, Some(1));
        assert_eq!(c7.min_admissible_n, 1);
        assert_eq!(c7.unstable_directions, Some(0));
        let c8 = classify(&ModelParams::new(8.0, 1)).unwrap();
        assert_eq!(c8.neutral_index, None);
        assert_eq!(c8.min_admissible_n, 1);
        assert!((c8.zero_crossing - 0.7928932188).abs() < 1e-9);
    }

    #[test]
    fn subcritical_rejected() {
        let e = derive(&ModelParams::new(6.0, 1)).unwrap_err();
        assert!(matches!(e, Error::SubcriticalDimension { .. }));
        assert!(derive(&ModelParams::new(d_star(1), 1)).is_err());
        assert!(derive(&ModelParams::new(7.0, 0)).is_err());
    }

    #[test]
    fn degenerate_dimension_flagged() {
        // omega = 2 gamma  <=>  d = (2/3)(7 + 2 sqrt 7) for k = 1
        let d = (2.0 / 3.0) * (7.0 + 2.0 * 7f64.sqrt());
        let c = derive(&ModelParams::new(d, 1)).unwrap();
        assert_eq!(c.regime, Regime::Degenerate);
    }

    #[test]
    fn identity_on_grid() {
        for k in 1..=5u32 {
            for i in 0..20 {
                let d = d_star(k) + 1e-3 + i as f64 * 0.77;
                let c = derive(&ModelParams::new(d, k)).unwrap();
                let lhs = d - 2.0 - c.gamma;
                let rhs = c.gamma + c.omega;
                assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs());
            }
        }
    }

    #[test]
    fn limits_in_d() {
        let k = 2;
        let c = derive(&ModelParams::new(d_star(k) + 1e-10, k)).unwrap();
        assert!(c.omega < 1e-3);
        assert!((c.gamma - 0.5 * (d_star(k) - 2.0)).abs() < 1e-3);
        let big = derive(&ModelParams::new(1e7, 1)).unwrap();
        assert!((big.omega / 1e7 - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn identity_holds(k in 1u32..8, off in 1e-6f64..50.0) {
            let d = d_star(k) + off;
            let c = derive(&ModelParams::new(d, k)).unwrap();
            prop_assert!(((d - 2.0 - c.gamma) - (c.gamma + c.omega)).abs() <= 1e-14 * (d - 2.0 - c.gamma));
            prop_assert!(c.gamma > 0.0 && c.omega > 0.0 && c.delta > 0.0);
            prop_assert!(c.delta <= c.omega && c.delta <= 2.0 * c.gamma);
        }

        #[test]
        fn lambda_unit_spacing(k in 1u32..6, off in 1e-3f64..30.0, n in 0usize..20) {
            let p = ModelParams::new(d_star(k) + off, k);
            let a = eigenvalue(&p, n).unwrap();
            let b = eigenvalue(&p, n + 1).unwrap();
            prop_assert!((b.lambda - a.lambda - 1.0).abs() < 1e-12);
            let g = derive(&p).unwrap().gamma;
            prop_assert!((a.beta - a.lambda / g).abs() < 1e-12 * (1.0 + a.beta.abs()));
        }

        #[test]
        fn beta_sign_matches_lambda(k in 1u32..6, off in 1e-3f64..30.0, n in 0usize..12) {
            let p = ModelParams::new(d_star(k) + off, k);
            let e = eigenvalue(&p, n).unwrap();
            let n0 = classify(&p).unwrap().zero_crossing;
            if (n as f64 - n0).abs() > 1e-9 {
                prop_assert_eq!(e.beta > 0.0, e.lambda > 0.0);
                prop_assert_eq!(e.lambda > 0.0, n as f64 > n0);
            }
        }

        #[test]
        fn stability_bound(k in 1u32..10, off in 1e-6f64..100.0) {
            let cl = classify(&ModelParams::new(d_star(k) + off, k)).unwrap();
            prop_assert!(cl.stability_bound_holds);
        }
    }
}
