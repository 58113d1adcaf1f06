//! Exact k-coverage checking and Monte Carlo coverage studies for spherical
//! Poisson Boolean models.

// `!(x > 0.0)` rejects NaN on purpose; fixed-size coordinate loops index
// several arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod coverage;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod model;
pub mod oracle;
pub mod region;
pub mod verify;

pub use error::{Error, Result};
