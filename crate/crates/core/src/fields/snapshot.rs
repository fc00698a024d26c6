//! Binary field snapshots: `<name>.bin` holds row-major little-endian `f64`
//! values, `<name>.json` the sidecar `{name, t, nx, ny, Lx, Ly, bc}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BoundaryMode, Grid2D, ScalarField};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub name: String,
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub bc: BoundaryMode,
}

/// Writes `dir/<stem>.bin` and `dir/<stem>.json`; returns the binary path.
pub fn write_snapshot(dir: &Path, stem: &str, name: &str, t: f64, field: &ScalarField) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let g = field.grid();
    let meta = SnapshotMeta { name: name.to_owned(), t, nx: g.nx, ny: g.ny, lx: g.lx, ly: g.ly, bc: g.bc };
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let bytes: Vec<u8> = field.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::json(&json, e))?;
    fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
    Ok(bin)
}

/// Reads a snapshot given the path of either file of the pair.
pub fn read_snapshot(path: &Path) -> Result<(SnapshotMeta, ScalarField)> {
    let json = path.with_extension("json");
    let bin = path.with_extension("bin");
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let meta: SnapshotMeta = serde_json::from_str(&text).map_err(|e| Error::json(&json, e))?;
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() != meta.nx * meta.ny * 8 {
        return Err(Error::InvalidGrid(format!(
            "{} holds {} bytes, sidecar announces {}x{} values",
            bin.display(),
            bytes.len(),
            meta.nx,
            meta.ny
        )));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let grid = Grid2D::new(meta.nx, meta.ny, meta.lx, meta.ly, meta.bc)?;
    let field = ScalarField::from_vec(grid, data)?;
    Ok((meta, field))
}
