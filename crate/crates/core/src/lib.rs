//! Quantum decision theory engine.

pub mod behavioral;
pub mod error;
pub mod measures;
pub mod network;
pub mod priors;
pub mod probability;
pub mod quadrature;
pub mod scenarios;
pub mod state;
pub mod tensor;

pub use error::{Error, ErrorClass, Result};
