//! Min-max functional Bayesian optimization.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod bench;
pub mod design;
pub mod error;
pub mod error_model;
pub mod fpca;
pub mod functional;
pub mod gp;
pub mod oracles;

pub use error::{Error, Result};
