//! Exact Dirac spectra of spin lens spaces.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod lens;
pub mod numtheory;
pub mod oracle;
pub mod search;
pub mod spectrum;

pub use error::{Error, Result};
