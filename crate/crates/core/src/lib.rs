//! Optimal piecewise-polynomial regression over tree-induced partitions.
//!
//! The crate builds the axis-aligned and affine-hyperplane mixed-integer
//! programs that fit a complete regression tree with polynomial leaves to a
//! sample, solves them with a built-in dense simplex and branch-and-bound
//! engine, and decodes solutions into [`tree::PwPolyModel`]s. An exhaustive
//! enumeration [`oracle`] provides an independent reference for small
//! axis-aligned instances.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, wall-clock
//! limits and multi-threaded search live in the `pwtame` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod experiments;
pub mod formulation;
pub mod functions;
pub mod oracle;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
