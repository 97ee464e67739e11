//! Artifact files. Bit and code files may start with `#` lines; readers
//! skip them, writers use them to record the configuration and seed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ceo_core::{BitSequence, CompoundCode};
use serde_json::Value;

/// Writes `body` under `dir`, creating it if needed. Returns the path.
pub fn write_artifact(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

pub fn comment_preamble(schema: &str, resolved: &Value) -> String {
    format!("# schema: {schema} v{}\n# config: {resolved}\n", ceo_core::sim::SCHEMA_VERSION)
}

pub fn bits_file(schema: &str, resolved: &Value, bits: &BitSequence) -> String {
    format!("{}{bits}\n", comment_preamble(schema, resolved))
}

pub fn read_text(path: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {path}"))
}

/// Parses a bit file after dropping comment lines.
pub fn parse_bits(text: &str) -> ceo_core::Result<BitSequence> {
    let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n");
    BitSequence::parse(&body)
}

pub fn parse_code(text: &str) -> ceo_core::Result<CompoundCode> {
    CompoundCode::deserialize(text)
}
