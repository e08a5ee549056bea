//! Command-line front end: rate predictions, simulations, fits, prediction versus
//! experiment reports and plot-ready dumps. Every command writes JSON that mirrors
//! what it prints, and each output directory carries a manifest of sha256 hashes.

pub mod compare;
pub mod dump;
pub mod error;
pub mod manifest;
pub mod output;
pub mod predict;
pub mod simulate;

pub use error::{CliError, CliResult};
