//! Configuration, result records, checkpoints and subcommand drivers.

pub mod checkpoint;
pub mod config;
pub mod record;
pub mod run;

pub use checkpoint::Checkpoint;
pub use config::{load_config, parse_config, RunConfig};
pub use record::{ResultRecord, Table, Unit};
pub use run::{run, sampled_zero_mode, RunOptions, Subcommand};
