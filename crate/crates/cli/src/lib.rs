//! Command-line front end for the correlation model: scenario files, runs,
//! parameter sweeps and output formatting.

pub mod error;
pub mod output;
pub mod run;
pub mod scenario;

pub use error::{CliError, FieldError};
pub use output::{emit, render, Format};
pub use run::{run, sweep, Cell, Report, ResultRow, SweepTable};
pub use scenario::Scenario;
