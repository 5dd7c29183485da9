//! Digit statistics for π: desk-scale digit generation, streaming k-gram
//! counting, and binomial normality checks on the resulting frequencies.

pub mod cli;
pub mod counter;
pub mod digitgen;
pub mod digitio;
pub mod error;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
