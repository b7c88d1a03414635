//! Computational toolkit for Jacobi matrices whose essential spectrum is a
//! finite union of intervals.
// `!(x > 0.0)` is how NaN gets rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandset;
pub mod error;
pub mod isotorus;
pub mod jacobi;
pub mod quadrature;
pub mod sumrules;

pub use error::{Error, Result};
