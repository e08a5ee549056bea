//! RODAS3: four-stage, order-3 stiffly accurate Rosenbrock method with an embedded
//! order-2 solution, for autonomous systems with banded Jacobians.

use crate::banded::BandMatrix;

pub trait BandedSystem {
    fn len(&self) -> usize;
    fn bandwidth(&self) -> (usize, usize);
    fn rhs(&self, y: &[f64], dy: &mut [f64]);
    /// Finite-difference increment for component j.
    fn perturbation(&self, y: &[f64], j: usize) -> f64 {
        1.5e-8 * y[j].abs().max(1e-8)
    }
}

const GAMMA: f64 = 0.5;
const A31: f64 = 2.0;
const A41: f64 = 2.0;
const A43: f64 = 1.0;
const C21: f64 = 4.0;
const C31: f64 = 1.0;
const C32: f64 = -1.0;
const C41: f64 = 1.0;
const C42: f64 = -1.0;
const C43: f64 = -8.0 / 3.0;
const M: [f64; 4] = [2.0, 0.0, 1.0, 1.0];
const E: [f64; 4] = [0.0, 0.0, 0.0, 1.0];
pub const ORDER: f64 = 3.0;

/// Column-grouped forward-difference Jacobian.
pub fn fd_jacobian<S: BandedSystem>(sys: &S, y: &[f64], f0: &[f64], jac: &mut BandMatrix) -> usize {
    let n = sys.len();
    let (kl, ku) = sys.bandwidth();
    let groups = kl + ku + 1;
    let mut yp = y.to_vec();
    let mut fp = vec![0.0; n];
    let mut dels = vec![0.0; n];
    jac.fill_zero();
    for g in 0..groups.min(n) {
        for j in (g..n).step_by(groups) {
            dels[j] = sys.perturbation(y, j);
            yp[j] = y[j] + dels[j];
            dels[j] = yp[j] - y[j];
        }
        sys.rhs(&yp, &mut fp);
        for j in (g..n).step_by(groups) {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                jac.set(i, j, (fp[i] - f0[i]) / dels[j]);
            }
            yp[j] = y[j];
        }
    }
    groups.min(n)
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub y: Vec<f64>,
    /// Embedded error estimate per component.
    pub err: Vec<f64>,
}

/// Workspace for repeated steps of one system size.
pub struct Rodas3 {
    jac: BandMatrix,
    lu: BandMatrix,
    f0: Vec<f64>,
    jac_valid: bool,
    pub rhs_evals: usize,
    pub factorizations: usize,
}

impl Rodas3 {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            jac: BandMatrix::zeros(n, kl, ku),
            lu: BandMatrix::zeros(n, kl, ku),
            f0: vec![0.0; n],
            jac_valid: false,
            rhs_evals: 0,
            factorizations: 0,
        }
    }

    /// Forces a fresh Jacobian at the next step.
    pub fn invalidate(&mut self) {
        self.jac_valid = false;
    }

    /// One step of size h from y. The Jacobian is evaluated at y unless cached for the same y.
    pub fn step<S: BandedSystem>(&mut self, sys: &S, y: &[f64], h: f64) -> Result<StepResult, crate::banded::Singular> {
        let n = sys.len();
        if !self.jac_valid {
            sys.rhs(y, &mut self.f0);
            self.rhs_evals += 1 + fd_jacobian(sys, y, &self.f0, &mut self.jac);
            self.jac_valid = true;
        }
        let (kl, ku) = sys.bandwidth();
        self.lu.fill_zero();
        let diag = 1.0 / (h * GAMMA);
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                self.lu.set(i, j, -self.jac.get(i, j));
            }
            self.lu.set(j, j, diag - self.jac.get(j, j));
        }
        self.lu.factor()?;
        self.factorizations += 1;

        let mut k1 = self.f0.clone();
        self.lu.solve(&mut k1);

        let mut k2: Vec<f64> = (0..n).map(|i| self.f0[i] + C21 / h * k1[i]).collect();
        self.lu.solve(&mut k2);

        let mut ys: Vec<f64> = (0..n).map(|i| y[i] + A31 * k1[i]).collect();
        let mut f = vec![0.0; n];
        sys.rhs(&ys, &mut f);
        let mut k3: Vec<f64> = (0..n).map(|i| f[i] + (C31 * k1[i] + C32 * k2[i]) / h).collect();
        self.lu.solve(&mut k3);

        for i in 0..n {
            ys[i] = y[i] + A41 * k1[i] + A43 * k3[i];
        }
        sys.rhs(&ys, &mut f);
        let mut k4: Vec<f64> = (0..n).map(|i| f[i] + (C41 * k1[i] + C42 * k2[i] + C43 * k3[i]) / h).collect();
        self.lu.solve(&mut k4);
        self.rhs_evals += 2;

        let ynew = (0..n).map(|i| y[i] + M[0] * k1[i] + M[1] * k2[i] + M[2] * k3[i] + M[3] * k4[i]).collect();
        let err = (0..n).map(|i| E[0] * k1[i] + E[1] * k2[i] + E[2] * k3[i] + E[3] * k4[i]).collect();
        Ok(StepResult { y: ynew, err })
    }
}
