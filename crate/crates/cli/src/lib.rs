//! Command-line front end: file formats, commands and plot export.

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod files;
pub mod plot;

pub use args::Cli;
pub use commands::{run, Io};
pub use error::{exit, CliError, CliResult};
