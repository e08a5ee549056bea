use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension d={d} is not above the critical dimension d*={d_star:.6} for k={k}")]
    SubcriticalDimension { d: f64, k: u32, d_star: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("profile left the trapping region at x={x:.4} (excursion {excursion:.3e})")]
    TrappingViolation { x: f64, excursion: f64 },
    #[error("tail fit is ill-conditioned: {0}")]
    TailFitIllConditioned(String),
    #[error("integrator failed: {0}")]
    Integrator(String),
    #[error("quadrature did not converge (residual {residual:.3e})")]
    QuadratureNotConverged { residual: f64 },
    #[error("integrand diverges at the origin (small-y exponent {exponent})")]
    DivergentIntegrand { exponent: f64 },
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("degenerate regime omega = 2 gamma: both coupling integrals diverge logarithmically")]
    DegenerateRegime,
    #[error("eigenvalue lambda_{n} = {lambda} is negative")]
    NegativeEigenvalue { n: usize, lambda: f64 },
    #[error("epsilon grows along the trajectory at s={s}")]
    BlowupOfEpsilon { s: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
