//! Output helpers: an output directory handle, 17-significant-digit float
//! serialization (round-trips f64 exactly), and the timestamp header rule
//! (text reports only, suppressible; CSVs never carry timestamps).

use std::path::{Path, PathBuf};

use crate::errors::{CliError, CliResult};

/// Serializes with 17 significant digits so ingestion reproduces the exact
/// f64 bit pattern.
pub fn g17(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct OutDir {
    dir: PathBuf,
    timestamp: bool,
}

impl OutDir {
    pub fn create(dir: &Path, timestamp: bool) -> CliResult<OutDir> {
        std::fs::create_dir_all(dir).map_err(|e| {
            CliError::Data(format!("cannot create output dir {}: {e}", dir.display()))
        })?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            timestamp,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a CSV (or any fully deterministic file) as-is.
    pub fn write_csv(&self, name: &str, content: &str) -> CliResult<()> {
        std::fs::write(self.path(name), content)
            .map_err(|e| CliError::Data(format!("cannot write {name}: {e}")))?;
        println!("wrote {}", self.path(name).display());
        Ok(())
    }

    /// Writes a text report, prefixed by a single timestamp header line
    /// unless suppressed.
    pub fn write_report(&self, name: &str, content: &str) -> CliResult<()> {
        let mut full = String::new();
        if self.timestamp {
            full.push_str(&format!("# generated: {}\n", chrono::Utc::now().to_rfc3339()));
        }
        full.push_str(content);
        std::fs::write(self.path(name), full)
            .map_err(|e| CliError::Data(format!("cannot write {name}: {e}")))?;
        println!("wrote {}", self.path(name).display());
        Ok(())
    }
}
