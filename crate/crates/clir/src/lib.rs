//! Std companion to `clir-core`: file formats, external MT adapters, the
//! two-stage pipeline driver, parameter sweeps and the command-line front end.

#![forbid(unsafe_code)]

pub mod adapter;
pub mod cli;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod sweep;

pub use error::{Error, Result};
