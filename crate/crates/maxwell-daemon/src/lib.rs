//! File formats, presets and subcommand drivers for the `maxwell-daemon` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

pub use commands::{run_text, Subcommand};

#[derive(Debug)]
pub enum RunError {
    /// Bad or inconsistent input; exit code 2.
    Config(String),
    /// Solver or evaluation failure; exit code 3.
    Numerical(String),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<maxwell_daemon_core::Error> for RunError {
    fn from(e: maxwell_daemon_core::Error) -> Self {
        if e.is_config() {
            RunError::Config(e.to_string())
        } else {
            RunError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}
