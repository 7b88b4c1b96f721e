//! Text file formats: datasets, run configuration, persisted chains and
//! simulation ground truth.

mod chain;
mod config;
mod dataset;

pub use chain::{load_chain, persist_chain, read_truth, write_truth, Manifest};
pub use config::{config_hash, parse_config, read_config, write_config};
pub use dataset::{
    format_edge_list, parse_edge_list, read_attributes, read_dataset, read_edge_list,
    write_attributes, write_dataset, write_edge_list, AttributeTable,
};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}
