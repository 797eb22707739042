//! Spontaneous four-wave mixing in a four-level atomic ensemble: biphoton
//! spectra, rates, correlations and Doppler averaging.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coefficients;
pub mod correlations;
pub mod doppler;
pub mod error;
pub mod model;
pub mod propagation;
pub mod quad;
pub mod specfun;
pub mod spectra;
pub mod steady_state;

pub use error::{Result, SfwmError};
