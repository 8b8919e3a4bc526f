//! File formats, the trade-off experiment, the grid benchmark and the
//! command-line front end on top of `robust-paths-core`.

pub mod bench;
pub mod cli;
pub mod experiment;
pub mod io;

pub use robust_paths_core as core;
