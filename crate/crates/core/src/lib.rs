//! Data-driven uncertainty sets and exact robust shortest-path solvers.
//!
//! Scenario travel times are turned into one of six uncertainty-set families
//! (convex hull, interval, ellipsoid, budgeted, permutohull, symmetric
//! permutohull). For each family the crate evaluates the worst-case cost of a
//! fixed path exactly and solves `min_x max_{c∈U} cᵀx` over simple paths.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, timing and the
//! command line live in the `robust-paths` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod evaluation;
pub mod graph;
pub mod grid;
pub mod scenario;
pub mod sets;
pub mod solvers;

pub use error::{Error, Result};
pub use graph::{CostVector, Graph, Path};
pub use scenario::{ScenarioMatrix, ScenarioStats};
pub use sets::{UncertaintyModel, UncertaintySpec};
pub use solvers::RobustSolution;
