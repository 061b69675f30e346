//! Library half of the experiment harness: config parsing, game
//! generators, record formats, and the sweep engine. The `blotto` binary is
//! a thin clap front end over these.

pub mod config;
pub mod error;
pub mod families;
pub mod records;
pub mod sweep;

pub use config::{
    CsfKindName, CsfSpec, ExperimentConfig, GameSource, OutputFormat, SweepAxis, Task,
};
pub use error::{CliError, CliResult};
pub use families::{GameFamily, generate_game};
pub use records::{DeltaRecord, ExploitRecord, SolutionRecord, SweepRecord};
pub use sweep::{SweepOutcome, SweepSummary, render_records, run_sweep};
