//! Command-line front end: configuration parsing with units, subcommand
//! runners and the output schema.

pub mod commands;
pub mod config;
pub mod schema;

pub use commands::{run, RunError};
pub use config::{parse_config, parse_document, ConfigError, Format, RunConfig};
pub use schema::{output_schema, COMMANDS};
