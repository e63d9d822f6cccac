use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown filter pair `{0}`")]
    Name(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("could not place {requested} disks without overlap after {attempts} attempts")]
    Placement { requested: usize, attempts: usize },

    #[error("image is constant; no threshold separates it")]
    ConstantImage,

    #[error("malformed {format} data at byte {offset}: {message}")]
    Format {
        format: &'static str,
        offset: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable, machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Name(_) => "name",
            Error::Dimension(_) => "dimension",
            Error::Config(_) => "config",
            Error::DegenerateRegion(_) => "degenerate_region",
            Error::Placement { .. } => "placement",
            Error::ConstantImage => "constant_image",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
