//! Quantum random walks on toy Fock space and their convergence to
//! quantum stochastic cocycles.

pub mod cocycle;
pub mod error;
pub mod generators;
pub mod lab;
pub mod linops;
pub mod random;
pub mod signals;
pub mod toywalk;

pub use error::{QrwError, Result};
