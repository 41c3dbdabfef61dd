//! Amortized synthesis toolkit.
//!
//! Learn a differentiable surrogate (decoder) of a deterministic realization
//! process, then train a feed-forward encoder from goal to design through the
//! frozen decoder. Ships with the direct-learning and direct-optimization
//! baselines and the evaluation harness for three tasks: a ballistic toy, a
//! fiber-extrusion smoother, and a segmented soft arm.

pub mod data;
pub mod geometry;
pub mod losses;
pub mod nn;
pub mod optim;
pub mod pipeline;
pub mod plot;
pub mod sampling;
pub mod sim;
pub mod util;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
