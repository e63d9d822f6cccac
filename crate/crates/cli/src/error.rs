use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] waveseg_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("could not encode output: {0}")]
    Encode(String),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Usage(_) => "usage",
            CliError::Encode(_) => "internal",
        }
    }
}

/// Process exit status for each error category.
pub fn exit_code(category: &str) -> i32 {
    match category {
        "internal" => 1,
        "usage" | "config" | "name" => 2,
        "io" => 3,
        "format" => 4,
        "dimension" => 5,
        "degenerate_region" => 6,
        "placement" => 7,
        "constant_image" => 8,
        _ => 1,
    }
}
