#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criticality;
pub mod diagnostics;
pub mod error;
pub mod frac_ops;
pub mod quadrature;
pub mod runner;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
