//! Simulation and statistical inference for sticky one-dimensional diffusions.
//!
//! The crate covers four layers:
//!
//! - [`kernel`]: closed-form transition density, distribution function and
//!   exact one-step sampler of the sticky Brownian motion.
//! - [`speed_scale`]: scale function, speed measure, exit probabilities and
//!   expected exit times of a general `(mu, sigma, rho)` sticky SDE.
//! - [`simulate`]: exact sticky-BM paths and the space-time Markov chain
//!   approximation (STMCA) on a grid.
//! - [`estimators`] and [`harness`]: the high-frequency local-time functional,
//!   the occupation-time sum, the stickiness estimator, and a deterministic
//!   parallel Monte Carlo runner.
//!
//! The sticky point is always `0`. Every simulator emits it as the bit-exact
//! value `0.0`, which is what the occupation statistic counts.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod checks;
pub mod config;
pub mod error;
pub mod estimators;
pub mod fsutil;
pub mod func;
pub mod harness;
pub mod kernel;
pub mod model;
pub mod path;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod special;
pub mod speed_scale;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use model::StickyModel;
pub use path::PathSample;
pub use rng::{derive_stream, RandomSource};
