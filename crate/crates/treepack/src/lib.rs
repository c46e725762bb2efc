//! Randomized decomposition of dense quasirandom graphs into copies of a
//! tree, with exact oracles for small instances.

pub mod config;
pub mod embed;
pub mod error;
pub mod exact;
pub mod gen;
pub mod graph;
pub mod matching;
pub mod nibble;
pub mod oracle;
pub mod partition;
pub mod rng;
pub mod run;
pub mod tree;

pub use error::{Error, ErrorClass, Result};
