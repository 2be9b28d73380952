#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod green;
pub mod linalg;
pub mod lsm;
pub mod measurement;
pub mod specialfun;

pub use error::{Error, Result};
