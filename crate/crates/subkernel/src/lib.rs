// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelopes;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod numeric;
pub mod quad;
pub mod subordinator;

pub use error::{Error, Result};
