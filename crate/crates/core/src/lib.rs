//! Simulation and numerical verification of the eigenvalue dynamics of the
//! elliptic Ginibre matrix-valued Brownian motion.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod parallel;
pub mod process;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod spectral_stats;
pub mod stats;
pub mod suites;
pub mod two_by_two;
pub mod verify;

pub use error::{Error, Result};
