//! File formats, configuration, parallel chains and the `tailmix` command line
//! on top of [`tailmix_core`].

pub mod chains;
pub mod cli;
pub mod config;
pub mod io;
pub mod output;

pub use config::{Bulk, Mode, PriorConfig, RunConfig};
pub use io::{ingest, DataFormat, IngestError};
