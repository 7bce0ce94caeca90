//! Key-value record and manifest serialization shared by the subcommands.
//!
//! Every output file starts with comment lines (`# key: value`) carrying
//! the run manifest, so any file can be traced back to the invocation
//! that produced it and pipelines can be replayed from the outputs alone.
//! Numbers are written with Rust's shortest round-trip formatting, which
//! keeps reruns byte-identical and re-ingestion lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gpdcycle::{Error, Result};

/// What gets stamped into every output file.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: &'static str,
    /// Canonical re-invocation string (subcommand plus arguments).
    pub invocation: String,
    pub input: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub outdir: PathBuf,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool: gpdcycle {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# subcommand: {}", self.subcommand);
        let _ = writeln!(s, "# invocation: {}", self.invocation);
        if let Some(input) = &self.input {
            let _ = writeln!(s, "# input: {}", input.display());
        }
        if let Some(config) = &self.config {
            let _ = writeln!(s, "# config: {}", config.display());
        }
        let _ = writeln!(s, "# outdir: {}", self.outdir.display());
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        s
    }
}

/// Write a key-value record file: manifest comments, a units comment,
/// then `key = value` lines in the given order.
pub fn write_kv(
    path: &Path,
    manifest: &RunManifest,
    units: &str,
    pairs: &[(&str, String)],
) -> Result<()> {
    let mut body = manifest.header();
    let _ = writeln!(body, "# units: {units}");
    for (key, value) in pairs {
        let _ = writeln!(body, "{key} = {value}");
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Write a CSV file with manifest comments, a units comment, a header
/// row, and data rows.
pub fn write_csv(
    path: &Path,
    manifest: &RunManifest,
    units: &str,
    header: &str,
    rows: &[String],
) -> Result<()> {
    let mut body = manifest.header();
    let _ = writeln!(body, "# units: {units}");
    let _ = writeln!(body, "{header}");
    for row in rows {
        let _ = writeln!(body, "{row}");
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Parse a key-value record written by [`write_kv`], ignoring comments.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx as u64 + 1,
            message: format!("expected `key = value`, got `{raw}`"),
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Fetch and parse one field of a record.
pub fn kv_field<T: std::str::FromStr>(
    record: &BTreeMap<String, String>,
    key: &str,
    path: &Path,
) -> Result<T> {
    let raw = record.get(key).ok_or_else(|| {
        Error::Data(format!("{}: missing field `{key}`", path.display()))
    })?;
    raw.parse().map_err(|_| {
        Error::Data(format!(
            "{}: field `{key}` has unparseable value `{raw}`",
            path.display()
        ))
    })
}
