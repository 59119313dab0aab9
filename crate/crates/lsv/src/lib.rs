//! Whole-project verification orchestrator for C codebases.
//!
//! Sweeps a source tree file-by-file and function-by-function, drives an
//! external bounded model checker on each entry point in priority order, and
//! turns raw counterexample logs into classified, CWE-tagged, machine
//! readable reports.
//!
//! The pipeline, end to end:
//!
//! 1. [`discovery`] enumerates the `.c` files to verify, deterministically.
//! 2. [`cparse`] extracts function definitions lexically and maps which
//!    functions call which.
//! 3. [`prioritize`] grades each function 0-5 by risk, prunes functions the
//!    checker will reach anyway, and orders the rest highest grade first.
//! 4. [`checker`] builds and executes one backend invocation per retained
//!    (file, function) pair, with timeout enforcement and resource
//!    accounting — or synthesizes runs from a mock fixture for hermetic
//!    testing.
//! 5. [`analysis`] parses checker output into violations, classifies them,
//!    and attaches CWE identifiers.
//! 6. [`report`] writes the CSV spreadsheet, the aggregated log, and the
//!    run summary.
//! 7. [`driver`] wires it all together behind the [`config`] CLI surface.

pub mod analysis;
pub mod checker;
pub mod config;
pub mod cparse;
pub mod discovery;
pub mod driver;
pub mod prioritize;
pub mod report;

mod error;
pub use error::{Error, Result};
