//! Hermite and Gaussian reproducing kernels of one and of countably many
//! variables, with certified truncation bounds.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hermite;
pub mod isometry;
pub mod kernels1d;
pub mod point;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod sequence;
pub mod series;
pub mod shape;
pub mod spec;
pub mod tensor;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
