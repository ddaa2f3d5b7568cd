//! Pseudo-simulation of Shor's factoring algorithm.
//!
//! The quantum part is not simulated gate by gate. Instead the order of `y`
//! is obtained from a classical oracle and used to sample the work-register
//! readout from its exact probability law; the readout is then pushed
//! through the continued-fraction extraction and the classical factoring
//! loop exactly as a real run would be.

pub mod bench;
pub mod cli;
pub mod error;
pub mod factorizer;
pub mod model;
pub mod numtheory;
pub mod orderfinder;
pub mod sampler;
pub mod spectrum;
pub mod transcript;

pub use error::{Error, Result};
