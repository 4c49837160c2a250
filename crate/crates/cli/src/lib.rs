//! Command implementations and the experiment service behind the
//! `ornament` binary.

pub mod assets;
pub mod commands;
pub mod error;
pub mod job;
pub mod plot;
pub mod server;
pub mod session;

pub use error::{CliError, CliResult};
