// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for the Gaussian-bandit Thompson sampling library:
//! spec-driven runs with deterministic CSV/JSON outputs, numerical
//! verification suites, and the prior-separation experiment.

pub mod config;
pub mod error;
pub mod runner;
pub mod separation;
pub mod verify;

pub use error::{HarnessError, Result};
