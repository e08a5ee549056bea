//! Moving-mesh simulation of the radial k-corotational harmonic map heat flow,
//! with blow-up tracking and rate fitting.

pub mod banded;
pub mod config;
pub mod error;
pub mod fit;
pub mod io;
pub mod model;
pub mod rosenbrock;
pub mod selfsim;
pub mod sim;

pub use config::{InitialData, SimConfig};
pub use error::{SimError, SimResult};
pub use fit::{fit_log, fit_power, FitKind, FitResult};
pub use selfsim::{to_self_similar, SelfSimilarSnapshot};
pub use sim::{initialize, run, DdTime, MeshState, Observables, Outcome, RunTrace, Simulator, Snapshot};
