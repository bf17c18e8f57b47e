//! Excited random walk laboratory: direct simulation of simple and excited
//! walks on ℤ^d, the SRW/ERW coupling on ℤ², tan-point detection and
//! estimation, an exact slit-plane dynamic program, and the experiment
//! drivers built on them.

pub mod coupling;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod lattice;
pub mod parallel;
pub mod rng;
pub mod special;
pub mod squares;
pub mod stats;
pub mod tan;
pub mod visited;
pub mod walkers;

pub use error::{Error, Result};
pub use lattice::{BiasParams, Direction, LatticePoint, StepDistribution};
pub use rng::RngStream;
pub use walkers::{StopCondition, StopReason, Stepper, WalkState};
