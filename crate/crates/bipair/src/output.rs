//! CSV output with reproducibility headers and atomic writes.
//!
//! Every emitted file starts with `#`-prefixed comment lines recording the
//! crate version and the full run configuration, followed by one header row
//! and data rows. Floats are formatted with Rust's shortest round-trip
//! representation, so identical configurations produce byte-identical files.
//! Files are written to a temporary sibling and renamed into place; a failed
//! run never leaves a partial file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// An in-memory CSV document.
#[derive(Clone, Debug, Default)]
pub struct CsvDocument {
    comments: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl CsvDocument {
    pub fn new() -> Self {
        let mut doc = CsvDocument::default();
        doc.comment(&format!("bipair {}", env!("CARGO_PKG_VERSION")));
        doc
    }

    /// Add a `# ...` comment line (configuration echo, tolerances).
    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.comments.push(format!("# {text}"));
        self
    }

    pub fn header(&mut self, columns: &[&str]) -> &mut Self {
        self.header = columns.join(",");
        self
    }

    /// Append a data row of already-formatted fields.
    pub fn row(&mut self, fields: &[String]) -> &mut Self {
        self.rows.push(fields.join(","));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "{c}");
        }
        if !self.header.is_empty() {
            let _ = writeln!(out, "{}", self.header);
        }
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    /// Write atomically: temp file in the same directory, then rename.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.render())
    }
}

/// Shortest round-trip formatting for a float field.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    fs::write(tmp_path, contents)?;
    fs::rename(tmp_path, path)?;
    Ok(())
}
