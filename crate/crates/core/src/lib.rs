pub mod cli;
pub mod combinators;
pub mod diff;
pub mod domains;
pub mod engine;
pub mod error;
pub mod frontend;
pub mod lattice;
pub mod report;

pub use error::{Error, Result};
