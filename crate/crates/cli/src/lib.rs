//! File formats, reports and subcommands for `securefn-core`.

pub mod commands;
pub mod error;
pub mod instance_file;
pub mod report;

pub use error::{CliError, CliResult, ExitStatus};
pub use instance_file::{digest, parse_instance, parse_instance_str, to_canonical_toml, InstanceFile};
