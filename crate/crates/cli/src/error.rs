use thiserror::Error;

use crate::manifest::ConfigErrors;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),

    #[error(transparent)]
    Core(#[from] laneflow_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    #[error("no output directory: pass --out or set out_dir in the config")]
    NoOutputDir,
}
