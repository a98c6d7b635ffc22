//! Command-line front end: world generation, standalone optimization,
//! exact fronts, single-strategy simulation and strategy comparison.
//!
//! Every command writes its outputs plus a `manifest.json` into the output
//! directory. Exit codes: 0 on success, 2 for usage or config errors, 3 when
//! the deployment problem has no feasible selection.

pub mod batch;
pub mod commands;
pub mod error;
pub mod manifest;

pub use batch::{run_batch, BatchSummary, SeedRun};
pub use commands::{run, Cli, Command, Precision};
pub use error::{exit, CliError};
pub use manifest::RunManifest;
