//! Core algorithms for training small GANs on low-dimensional data, building
//! GAN ensembles (independent, self and cascade) and scoring generators with
//! nearest-neighbor distance statistics.
//!
//! The crate is `no_std` + `alloc`. File formats, orchestration and the CLI
//! live in the `ganlab` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod ensemble;
pub mod eval;
pub mod gan;
pub mod numerics;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use synth::PointSet;
