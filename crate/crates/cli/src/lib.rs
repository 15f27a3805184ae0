//! Instance and report files, seeded generators and the invariant-suite
//! runner behind the `stoq` command.

pub mod error;
pub mod generate;
pub mod io;
pub mod suite;

pub use error::{CliError, CliResult};
