use super::field::SpectralField;
use super::grid::XiGrid;
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::resonance::Cursor;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"WGSF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub dim: usize,
    pub radius: u32,
    pub xi_half_width: f64,
    pub count: usize,
    pub time: f64,
    pub layout: String,
    pub dtype: String,
    #[serde(default)]
    pub extra: serde_json::Value,
}

/// Binary snapshot plus `<path>.json` sidecar. Amplitudes are stored as
/// little-endian complex64 (two f32 per value).
pub fn write_snapshot(path: &Path, field: &SpectralField, extra: serde_json::Value) -> Result<PathBuf> {
    let mut buf = Vec::with_capacity(40 + 8 * field.amps.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(field.lattice.dim as u32).to_le_bytes());
    buf.extend_from_slice(&field.lattice.radius.to_le_bytes());
    buf.extend_from_slice(&field.grid.half_width.to_le_bytes());
    buf.extend_from_slice(&(field.grid.count as u32).to_le_bytes());
    buf.extend_from_slice(&field.time_origin.to_le_bytes());
    for z in &field.amps {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    let meta = SnapshotMeta {
        dim: field.lattice.dim,
        radius: field.lattice.radius,
        xi_half_width: field.grid.half_width,
        count: field.grid.count,
        time: field.time_origin,
        layout: "xi-major; modes lexicographic, last coordinate fastest".into(),
        dtype: "complex64 little-endian (f32 re, f32 im)".into(),
        extra,
    };
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_vec_pretty(&meta)?)?;
    Ok(side)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    let bytes = std::fs::read(path)?;
    let mut cur = Cursor { buf: &bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    if cur.u32()? != VERSION {
        return Err(Error::Format("unsupported snapshot version".into()));
    }
    let dim = cur.u32()? as usize;
    let radius = cur.u32()?;
    let half_width = f64::from_bits(cur.u64()?);
    let count = cur.u32()? as usize;
    let time = f64::from_bits(cur.u64()?);
    let grid = XiGrid::new(half_width, count)?;
    let lattice = LatticeBox::new(dim, radius);
    let n = count * lattice.len();
    let mut amps = Vec::with_capacity(n);
    for _ in 0..n {
        let re = f32::from_bits(cur.u32()?);
        let im = f32::from_bits(cur.u32()?);
        amps.push(Complex64::new(re as f64, im as f64));
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format("trailing bytes in snapshot".into()));
    }
    let mut field = SpectralField::from_amps(grid, lattice, amps)?;
    field.time_origin = time;
    Ok(field)
}
