//! Deterministic output layout: one directory per run, named by a hash of
//! the canonical configuration.

use crate::CliError;
use std::path::{Path, PathBuf};

/// FNV-1a over the canonical config bytes; stable across runs and platforms.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// `<out>/<kind>-<hash(config + salt)>`, created fresh (idempotent).
pub fn run_dir(out: &Path, kind: &str, config_json: &str, salt: &str) -> Result<PathBuf, CliError> {
    let mut bytes = config_json.as_bytes().to_vec();
    bytes.extend_from_slice(salt.as_bytes());
    let dir = out.join(format!("{kind}-{:016x}", fnv1a64(&bytes)));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io("creating run directory", e))?;
    Ok(dir)
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io("writing output file", e))
}

/// Indices of at most `max_files` evenly spaced entries (always including
/// the first and last); keeps snapshot counts bounded on long runs.
pub fn snapshot_indices(n: usize, max_files: usize) -> Vec<usize> {
    if n == 0 {
        return vec![];
    }
    if n <= max_files {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..max_files)
        .map(|i| i * (n - 1) / (max_files - 1))
        .collect();
    idx.dedup();
    idx
}
