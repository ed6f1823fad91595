//! Free noncommutative function theory: nc polynomials, polyhedral domains,
//! Schur-Agler realizations, Cayley transforms and Herglotz-Agler
//! polynomial approximation.

pub mod domain;
pub mod error;
pub mod fixtures;
pub mod herglotz;
pub mod json;
pub mod matcore;
pub mod ncderiv;
pub mod ncpoly;
pub mod random;
pub mod realization;
pub mod transforms;
pub mod verify;

pub use error::{NcError, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
