//! Std companion to `taildep-core`: JSON model documents, CSV output,
//! rayon-parallel evaluation and the `taildep` command line.

pub mod cli;
pub mod error;
pub mod output;
pub mod parallel;
pub mod schema;

pub use error::CliError;
