//! Heteroskedasticity and autocorrelation consistent (HAC) covariance
//! estimation for OLS coefficients, with VAR prewhitening, a multivariate
//! Burg prewhitener and frequency-domain leave-one-out cross-validation of
//! the prewhitening order and kernel bandwidth.

pub mod error;
pub mod linalg;
pub mod dgp;
pub mod regress;
pub mod spectral;
pub mod varfit;
pub mod lrv;
pub mod cvll;
pub mod harness;

pub use error::{HacError, Result};
