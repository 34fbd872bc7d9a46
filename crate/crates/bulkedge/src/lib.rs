//! Command-line layer over `bulkedge-core`: model and run configuration
//! files, the `bulk`, `edge`, `gp`, `verify` and `spectrum` pipelines, JSON
//! reports and CSV plot data.

pub mod config;
pub mod error;
pub mod modelfile;
pub mod output;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{run, Command, RunOutput};
