//! Library half of the `facepipe` binary: argument definitions, command
//! implementations, JSON documents and overlay drawing.

pub mod annotate;
pub mod commands;
pub mod documents;
pub mod error;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
