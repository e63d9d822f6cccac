//! Staged output files: nothing touches the disk until the run has succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use waveseg_core::Error;

use crate::error::CliError;

#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    pub fn add_json(&mut self, path: &Path, value: &impl Serialize) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(path, bytes);
        Ok(())
    }

    /// `iter,objective` rows, one per trace entry.
    pub fn add_trace(&mut self, path: &Path, trace: &[f64]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iter", "objective"])?;
        for (i, v) in trace.iter().enumerate() {
            w.serialize((i, v))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Encode(e.to_string()))?;
        self.add(path, bytes);
        Ok(())
    }

    /// Writes every file; on failure removes the ones already written.
    pub fn commit(self) -> Result<(), CliError> {
        let mut written: Vec<&Path> = Vec::new();
        for (path, bytes) in &self.files {
            if let Err(e) = fs::write(path, bytes) {
                for p in written {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::Io {
                    path: path.clone(),
                    source: e,
                }
                .into());
            }
            written.push(path);
        }
        Ok(())
    }
}
