//! Files, experiments and the command line around `ganlab-core`.
//!
//! - [`io`]: point sets and distance matrices as CSV, JSON helpers
//! - [`checkpoint`]: bit-exact model and ensemble checkpoints
//! - [`config`]: the experiment configuration schema
//! - [`runner`]: end-to-end experiment runs and their manifest
//! - [`summary`]: aggregation of a run's reports
//! - [`par`]: thread-parallel k-NN and standard-ensemble training

pub mod checkpoint;
pub mod config;
mod error;
pub mod io;
pub mod par;
pub mod runner;
pub mod summary;

pub use error::{LabError, Result};
