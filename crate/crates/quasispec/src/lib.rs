//! Continuous least-squares solvers for ODE boundary-value and eigenvalue
//! problems over arbitrary bases, built on a quasimatrix engine: columns are
//! adaptively resolved piecewise Chebyshev functions, and factorizations
//! (QR, SVD) are carried out on function-valued matrices directly.

pub mod blockop;
pub mod dense;
pub mod error;
pub mod funcore;
pub mod lssolvers;
pub mod pseudospectra;
pub mod quasimatrix;
pub mod rectgep;
pub mod ultra;

pub use error::{Error, Result};
