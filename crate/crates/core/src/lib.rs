//! Stochastic separation bounds.
//!
//! Given a distribution family, a dimension `n`, a Fisher threshold `alpha`
//! and a failure probability `delta`, compute how many i.i.d. points can be
//! drawn while every ordered pair stays Fisher separable, and check those
//! numbers by simulation.
//!
//! The pipeline is: [`twopoint`] computes the probability `f(n, alpha)` that a
//! random ordered pair is inseparable, [`bounds`] turns it into a sample-size
//! bound, and [`montecarlo`] samples the same families to verify both.

// `!(x > 0.0)` guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod specfun;
pub mod twopoint;

pub use error::{Error, Result};
pub use specfun::LogProb;
