//! Low-rank approximation of kernel matrices with entrywise error analysis.
//!
//! The crate builds Gram matrices for Matérn, squared-exponential and
//! dot-product kernels, computes optimal rank-`d` spectral truncations with
//! their max-entry, Frobenius and spectral errors, compares them against
//! Gaussian random-projection approximations, and evaluates closed-form
//! spectra and rate bounds for the Gaussian-measure RBF and sphere
//! dot-product settings.

pub mod analytic;
pub mod datasets;
pub mod error;
pub mod kernels;
pub mod random_projection;
pub mod rng;
pub mod spectral;
pub mod verification;

pub use error::{Error, Result};
