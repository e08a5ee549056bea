//! Eigenbasis of the linearization around the equatorial map.
//!
//! φ_n(y) = 𝒩_n y^{−γ} L_n^{(ω/2)}(y²/4), λ_n = −γ/2 + n, orthonormal in
//! L²(ρ dy) with ρ = y^{d−1}e^{−y²/4}. Integrals are done in z = y²/4, where
//! y^{d−1}dy = 2^{d−1} z^{d/2−1} dz, so a product behaving like y^p at the origin
//! is integrated exactly by a Gauss-Laguerre rule with exponent (d−2+p)/2.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::laguerre::{laguerre, laguerre_all, laguerre_at_zero, laguerre_d1, laguerre_d2};
use crate::numerics::quad::{self, LaguerreRule};
use crate::params::{derive, DerivedConstants, ModelParams};

pub const ORTHONORMALITY_TOL: f64 = 1e-8;
const BASE_NODES: usize = 200;
const MAX_NODES: usize = 800;

#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub params: ModelParams,
    pub constants: DerivedConstants,
    pub max_n: usize,
    pub norm: Vec<f64>,
    pub c_origin: Vec<f64>,
    /// Orthonormality residual max |G − I| reached by the build.
    pub residual: f64,
    rule: std::sync::Arc<LaguerreRule>,
}

/// The closed-form normalization 2^{−1−ω/2} √(Γ(n+1)/Γ(n+1+ω/2)).
pub fn closed_form_norm(omega: f64, n: usize) -> f64 {
    let nf = n as f64;
    ((-1.0 - 0.5 * omega) * std::f64::consts::LN_2 + 0.5 * (ln_gamma(nf + 1.0) - ln_gamma(nf + 1.0 + 0.5 * omega))).exp()
}

/// The closed-form origin coefficient 2^{−1−ω/2}/Γ(1+ω/2) √(Γ(1+n+ω/2)/Γ(1+n)).
pub fn closed_form_origin(omega: f64, n: usize) -> f64 {
    let nf = n as f64;
    let a = 0.5 * omega;
    ((-1.0 - a) * std::f64::consts::LN_2 - ln_gamma(1.0 + a) + 0.5 * (ln_gamma(1.0 + nf + a) - ln_gamma(1.0 + nf))).exp()
}

pub fn build_basis(p: &ModelParams, max_n: usize) -> Result<EigenBasis> {
    let c = derive(p)?;
    let alpha = 0.5 * c.omega;
    let mut nodes = BASE_NODES.max(max_n + 2);
    loop {
        let rule = LaguerreRule::cached(nodes, alpha)?;
        let raw: Vec<f64> = (0..=max_n).map(|n| closed_form_norm(c.omega, n)).collect();
        let gram_raw = gram(&rule, &raw, c.omega, max_n);
        let norm: Vec<f64> = (0..=max_n).map(|n| raw[n] / gram_raw[n][n].sqrt()).collect();
        let g = gram(&rule, &norm, c.omega, max_n);
        let mut residual: f64 = 0.0;
        for i in 0..=max_n {
            for j in 0..=max_n {
                let target = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((g[i][j] - target).abs());
            }
        }
        if residual <= ORTHONORMALITY_TOL {
            let c_origin = (0..=max_n).map(|n| norm[n] * laguerre_at_zero(n, alpha)).collect();
            return Ok(EigenBasis { params: *p, constants: c, max_n, norm, c_origin, residual, rule });
        }
        if nodes >= MAX_NODES {
            return Err(Error::QuadratureNotConverged { residual });
        }
        nodes *= 2;
    }
}

fn gram(rule: &LaguerreRule, norm: &[f64], omega: f64, max_n: usize) -> Vec<Vec<f64>> {
    let alpha = 0.5 * omega;
    let scale = (1.0 + omega) * std::f64::consts::LN_2;
    let mut g = vec![vec![0.0; max_n + 1]; max_n + 1];
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        if w == 0.0 {
            continue;
        }
        let l = laguerre_all(max_n, alpha, z);
        for i in 0..=max_n {
            for j in 0..=i {
                g[i][j] += w * l[i] * l[j];
            }
        }
    }
    for i in 0..=max_n {
        for j in 0..=i {
            g[i][j] *= norm[i] * norm[j] * scale.exp();
            g[j][i] = g[i][j];
        }
    }
    g
}

impl EigenBasis {
    pub fn lambda(&self, n: usize) -> f64 {
        -0.5 * self.constants.gamma + n as f64
    }

    pub fn rule_size(&self) -> usize {
        self.rule.len()
    }

    pub fn phi(&self, n: usize, y: f64) -> f64 {
        let z = 0.25 * y * y;
        self.norm[n] * y.powf(-self.constants.gamma) * laguerre(n, 0.5 * self.constants.omega, z)
    }

    /// φ_n, φ_n' and φ_n'' in y, from the closed form.
    pub fn phi_derivatives(&self, n: usize, y: f64) -> (f64, f64, f64) {
        let g = self.constants.gamma;
        let a = 0.5 * self.constants.omega;
        let z = 0.25 * y * y;
        let (l, l1, l2) = (laguerre(n, a, z), laguerre_d1(n, a, z), laguerre_d2(n, a, z));
        let nn = self.norm[n];
        let ym = y.powf(-g);
        let f = nn * ym * l;
        let f1 = nn * (-g * ym / y * l + 0.5 * y * ym * l1);
        let f2 = nn * (g * (g + 1.0) * ym / (y * y) * l + 0.5 * (1.0 - 2.0 * g) * ym * l1 + 0.25 * y * y * ym * l2);
        (f, f1, f2)
    }

    /// y^γ φ_n(y), which tends to c_n at the origin.
    pub fn phi_scaled(&self, n: usize, y: f64) -> f64 {
        self.norm[n] * laguerre(n, 0.5 * self.constants.omega, 0.25 * y * y)
    }

    /// (𝒜φ_n − λ_n φ_n)(y) with 𝒜φ = −(1/ρ)(ρφ')' − K φ/y².
    pub fn eigen_defect(&self, n: usize, y: f64) -> f64 {
        let (f, f1, f2) = self.phi_derivatives(n, y);
        let d = self.params.d;
        let a_phi = -(f2 + ((d - 1.0) / y - 0.5 * y) * f1) - self.params.kappa() * f / (y * y);
        a_phi - self.lambda(n) * f
    }

    /// Gram matrix of φ_0..φ_m under the module's rule.
    pub fn gram(&self, m: usize) -> Vec<Vec<f64>> {
        gram(&self.rule, &self.norm, self.constants.omega, m.min(self.max_n))
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.gram(self.max_n);
        let mut r: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                r = r.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        r
    }

    /// ⟨(𝒜 − λ_n)φ_n, φ_m⟩.
    pub fn eigen_residual(&self, n: usize, m: usize) -> f64 {
        let g = self.constants.gamma;
        // defect·φ_m ~ y^{−2γ} up to cancelling y^{−2γ−2} terms
        let p = -2.0 * g;
        self.inner_product_gauss(|y| self.eigen_defect(n, y) * self.phi(m, y), p, BASE_NODES)
            .expect("eigenfunction products are integrable")
    }

    /// ⟨f, g⟩ where f·g ~ y^p as y → 0 (p declared by the caller).
    pub fn inner_product<F, G>(&self, f: F, g: G, p: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        self.inner_product_gauss(|y| f(y) * g(y), p, BASE_NODES)
    }

    fn inner_product_gauss<H: Fn(f64) -> f64>(&self, h: H, p: f64, nodes: usize) -> Result<f64> {
        inner_product_gauss(self.params.d, h, p, nodes)
    }

    /// Adaptive evaluation of ⟨f, g⟩ on (0, y_max], for integrands with sharp
    /// features that Gauss rules resolve poorly.
    pub fn inner_product_adaptive<H: Fn(f64) -> f64>(&self, h: H, p: f64, y_max: f64, tol: f64) -> Result<f64> {
        inner_product_adaptive(self.params.d, h, p, y_max, tol)
    }

    /// a_n = ⟨ψ, φ_n⟩ restricted to [0, y_max], for n ≤ max_n, where ψ ~ y^q
    /// at the origin (q = 0 for snapshots of f − π/2).
    pub fn project<F: Fn(f64) -> f64>(&self, psi: F, q: f64, y_max: f64) -> Result<Vec<f64>> {
        let g = self.constants.gamma;
        let truncated = |y: f64| if y <= y_max { psi(y) } else { 0.0 };
        (0..=self.max_n)
            .map(|n| self.inner_product_gauss(|y| truncated(y) * self.phi(n, y), q - g, BASE_NODES))
            .collect()
    }

    /// Projection with adaptive quadrature; suited to snapshots with thin layers.
    /// `tol` is relative to the size of each coefficient's integrand.
    pub fn project_adaptive<F: Fn(f64) -> f64>(&self, psi: F, q: f64, y_max: f64, tol: f64) -> Result<Vec<f64>> {
        let g = self.constants.gamma;
        (0..=self.max_n)
            .map(|n| self.inner_product_adaptive(|y| psi(y) * self.phi(n, y), q - g, y_max, tol))
            .collect()
    }
}

fn check_exponent(d: f64, p: f64) -> Result<()> {
    if p + d - 1.0 <= -1.0 {
        Err(Error::DivergentIntegrand { exponent: p + d - 1.0 })
    } else {
        Ok(())
    }
}

/// ∫₀^∞ h(y) y^{d−1} e^{−y²/4} dy for h ~ y^p at the origin.
pub fn inner_product_gauss<H: Fn(f64) -> f64>(d: f64, h: H, p: f64, nodes: usize) -> Result<f64> {
    check_exponent(d, p)?;
    let alpha = 0.5 * (d - 2.0 + p);
    let rule = LaguerreRule::cached(nodes, alpha)?;
    let pref = ((d - 1.0 + p) * std::f64::consts::LN_2).exp();
    Ok(pref * rule.integrate(|z| {
        let y = 2.0 * z.sqrt();
        h(y) * y.powf(-p)
    }))
}

/// Same integral by adaptive quadrature in t = ln y on [ln y_lo, ln y_max];
/// `tol` is relative to the integral of |h|ρ.
pub fn inner_product_adaptive<H: Fn(f64) -> f64>(d: f64, h: H, p: f64, y_max: f64, tol: f64) -> Result<f64> {
    check_exponent(d, p)?;
    let expo = p + d;
    // the piece below y_lo is bounded by y_lo^{expo}·sup|h y^{-p}|/expo
    let y_lo = (1e-300f64).powf(1.0 / expo).max(1e-12);
    let (a, b) = (y_lo.ln(), y_max.ln());
    let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
    let f = |t: f64| {
        let y = t.exp();
        h(y) * y.powf(d) * (-0.25 * y * y).exp()
    };
    let scale = quad::gauss_legendre_panels(|t| f(t).abs(), a, b, panels, 8);
    Ok(quad::adaptive_panels(&f, a, b, panels, tol * scale.max(f64::MIN_POSITIVE)).value)
}
