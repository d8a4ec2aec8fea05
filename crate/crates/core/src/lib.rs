//! Numerical laboratory for Hardy martingales on finite torus products.
//!
//! - [`torus`]: functions on the circle, Hilbert transform, outer functions, Fejér kernels.
//! - [`martingale`]: martingales on `T^k`, norms, dyadic projection, transforms.
//! - [`truncation`]: Monte-Carlo stopping-time truncation of analytic functions.
//! - [`dgi`]: the Davis–Garsia decomposition and inequality checkers.
//! - [`embedding`]: lacunary ladders, Riesz-product kernels and transfer operators.

mod descent;
pub mod dgi;
pub mod embedding;
pub mod error;
pub mod martingale;
pub mod rng;
pub mod torus;
pub mod truncation;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
pub use torus::{DiskPoint, TorusFunction, TorusGrid};
