//! Command-line driver: file ingestion, run orchestration and artifact output.

pub mod commands;
pub mod io;
pub mod report;

pub use commands::run;
