//! Front end for the `tonsure` binary: argument parsing, the subcommands,
//! and the curve, manifest and chart writers.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error,
//! 3 degenerate statistics.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod plot;
