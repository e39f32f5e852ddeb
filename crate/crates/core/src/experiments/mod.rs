//! Experiment drivers behind the command-line subcommands.
//!
//! Every driver validates its whole configuration before computing anything
//! and returns rows in a deterministic order, whatever the thread count.

pub mod convergence;
pub mod count;
pub mod figure1;
pub mod output;
pub mod sweep;

pub use convergence::{empirical_constants, run_convergence, ConvergenceConfig, ConvergenceRow};
pub use count::{count_report, CountReport};
pub use figure1::{figure1, Figure1Config, Figure1Row};
pub use output::{csv_string, fmt_float, write_csv, CsvRecord, Sidecar};
pub use sweep::{run_sweep, uniform_c_values, SweepConfig, SweepRow, SweepSummary};
