//! Matched-asymptotics toolkit for blow-up of the k-corotational harmonic map
//! heat flow: derived constants, the harmonic map profile, the Laguerre
//! eigenbasis of the linearized flow, nonlinear coupling constants and the
//! reduced dynamics that produce predicted blow-up rate laws.

pub mod coupling;
pub mod error;
pub mod numerics;
pub mod params;
pub mod profile;
pub mod rates;
pub mod spectral;

pub use error::{Error, Result};
