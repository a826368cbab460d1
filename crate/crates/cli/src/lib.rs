//! Library side of the `cnlse` command-line tool: running scenarios into
//! CSV files, stability audits and run-to-run comparisons.

pub mod commands;
pub mod error;
pub mod output;

pub use commands::{
    cmd_compare, cmd_run, cmd_stability, CompareReport, CompareRow, KeyValues, Labelled, RunOutcome, RunReport,
    RunRequest, Source,
};
pub use error::{exit, CliError, CliResult};
pub use output::OutputPlan;
