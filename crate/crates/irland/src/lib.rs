//! File formats, config files, parallel sweeps and the `irland` command line
//! on top of `irland-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod grid_csv;
pub mod io;
pub mod sweep;

pub use error::{Error, Result};
