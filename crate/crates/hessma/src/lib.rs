//! File formats, command line and verification suites around
//! [`hessma_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod parallel;
pub mod svg;
pub mod verify;

pub use error::{CliError, CliResult};
