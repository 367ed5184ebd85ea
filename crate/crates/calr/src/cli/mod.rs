//! Command-line front end: JSON configs in, bit-stable CSV/JSON (and optional SVG) out.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver failure, 3 a
//! verification check failed. `CALR_THREADS` caps the worker pool.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

pub use config::Config;
pub use run::{main_entry, run, verdict_code, EXIT_ASSERTION, EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION};
