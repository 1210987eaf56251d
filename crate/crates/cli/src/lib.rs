//! Command-line front end: trajectory files, CSV export and the
//! subcommands that drive the library.

pub mod commands;
pub mod error;
pub mod file;

pub use commands::{run, Cli};
pub use error::CliError;
pub use file::{Metadata, TrajectoryFile};
