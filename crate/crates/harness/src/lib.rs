//! Experiment harness for the qvar toolkit: configuration, scan runners and
//! persisted run records. The `qvar` binary is a thin CLI over this crate.
//!
//! Every scan takes an [`ExperimentConfig`] and returns a [`RunRecord`]
//! holding the config snapshot, a table of measurements, fitted constants and
//! pass/fail checks. Reductions happen in index order, so identical configs
//! give identical records regardless of thread count.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod env;
mod error;
pub mod record;
pub mod scans;
pub mod stats;

pub use config::{ExperimentConfig, FamilySpec};
pub use error::{HarnessError, Result};
pub use record::{Cell, Check, RunRecord};
