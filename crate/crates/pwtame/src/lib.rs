//! File formats, a threaded solver driver, the experiment runner and the
//! command-line front end for [`pwtame_core`].
//!
//! * [`samples`]: sample CSV files.
//! * [`model_file`]: versioned JSON model files.
//! * [`mps`]: fixed-format MPS export and import with a name table.
//! * [`solution`]: `name value` solution files from external solvers.
//! * [`drive`]: wall-clock and multi-threaded solving, fitting front end.
//! * [`scenario`]: experiment configurations, presets and runners.

mod error;

pub mod drive;
pub mod model_file;
pub mod mps;
pub mod samples;
pub mod scenario;
pub mod solution;

pub use error::{Error, Result};
pub use pwtame_core as core;
