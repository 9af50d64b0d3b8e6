//! Exact tools for counting nonnegative k-sums of real numbers and for the
//! hypergraph, linear-programming and probabilistic machinery around them.

pub mod baranyai;
pub mod combinatorics;
pub mod constructions;
pub mod deviations;
pub mod error;
pub mod exact;
pub mod generate;
pub mod harness;
pub mod hypergraph;
pub mod ksum;
pub mod report;

pub use error::{Error, Result};
