//! Numerical building blocks shared by the analysis modules.

pub mod dopri5;
pub mod interp;
pub mod laguerre;
pub mod lsq;
pub mod optimize;
pub mod quad;
