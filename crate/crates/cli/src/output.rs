//! Output helpers: UTF-8, LF-terminated CSV with shortest round-trip float
//! formatting, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

pub struct CsvWriter {
    buffer: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&header.join(","));
        buffer.push('\n');
        CsvWriter {
            buffer,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        let _ = writeln!(self.buffer, "{}", fields.join(","));
    }

    pub fn write_to(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.buffer.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Optional float; absent values render as an empty CSV field.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn ensure_out_dir(dir: &Path) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir.to_path_buf())
}
