//! Backward orbits of holomorphic self-maps of the unit ball.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod catalog;
pub mod cli;
mod dd;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod orbit;
mod solve;
pub mod suite;

pub use error::{Error, Result};
