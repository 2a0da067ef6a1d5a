//! First-passage and overshoot laboratory for Lévy processes.
//!
//! The crate classifies Lévy triplets by whether their position at first
//! passage above a level is almost surely constant, simulates paths and
//! passage outcomes, estimates the (sub-probability) law of the passage
//! position, and computes that law exactly for lattice chains.

pub mod config;
pub mod error;
pub mod experiment;
pub mod firstpassage;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod pathsim;
pub mod report;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{
    classify, lattice_fit, predicted_passage_position, validate_triplet, Atom, ClassVariant, Cutoff, JumpMeasure,
    LevyTriplet, ProcessClass, TailFamily,
};
pub use pathsim::{PassageOutcome, PassageResult, PathSkeleton, SimConfig, Simulator};
pub use scalar::Scalar;
