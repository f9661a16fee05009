use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Output files staged in memory and written together once a run has
/// finished, so a failed run leaves nothing behind.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    /// Set when a run completed but one of its checks did not hold.
    pub check_failure: Option<String>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::CliError::Encode(e.to_string()))?;
        self.add(name, bytes);
        Ok(())
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        let why = why.into();
        self.check_failure = Some(match self.check_failure.take() {
            Some(prev) => format!("{prev}; {why}"),
            None => why,
        });
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}
