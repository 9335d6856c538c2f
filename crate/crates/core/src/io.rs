//! Binary field snapshots.
//!
//! Format `TSF1`: magic bytes `TSF1`, little-endian `u32 nx, ny`,
//! `u32` component count, `f64 lx, ly`, `f64 time`, then each component's
//! nodes row-major as little-endian `f64`. Bit-exact by construction: the
//! writer emits the in-memory doubles unchanged.

use crate::error::CoreError;
use crate::grid::{ScalarField, TorusGrid};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"TSF1";

/// Write one snapshot. All components must share a grid.
pub fn write_tsf1(path: &Path, time: f64, comps: &[&ScalarField]) -> Result<(), CoreError> {
    let first = comps
        .first()
        .ok_or_else(|| CoreError::domain("snapshot needs at least one component"))?;
    let grid = first.grid;
    for c in comps {
        if c.grid != grid {
            return Err(CoreError::GridMismatch("snapshot components differ".into()));
        }
    }
    let mut buf = Vec::with_capacity(4 + 12 + 24 + comps.len() * grid.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(grid.nx as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.ny as u32).to_le_bytes());
    buf.extend_from_slice(&(comps.len() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.lx.to_le_bytes());
    buf.extend_from_slice(&grid.ly.to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for c in comps {
        for v in &c.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Read a snapshot back: `(grid, time, components)`.
pub fn read_tsf1(path: &Path) -> Result<(TorusGrid, f64, Vec<ScalarField>), CoreError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 40 || &bytes[0..4] != MAGIC {
        return Err(CoreError::domain("not a TSF1 snapshot"));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let nx = u32_at(4) as usize;
    let ny = u32_at(8) as usize;
    let ncomp = u32_at(12) as usize;
    let lx = f64_at(16);
    let ly = f64_at(24);
    let time = f64_at(32);
    let grid = TorusGrid::new(nx, ny, lx, ly)?;
    let expect = 40 + ncomp * grid.len() * 8;
    if bytes.len() != expect {
        return Err(CoreError::domain(format!(
            "TSF1 payload size {} does not match header ({expect})",
            bytes.len()
        )));
    }
    let mut comps = Vec::with_capacity(ncomp);
    let mut off = 40;
    for _ in 0..ncomp {
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            data.push(f64_at(off));
            off += 8;
        }
        comps.push(ScalarField { grid, data });
    }
    Ok((grid, time, comps))
}
