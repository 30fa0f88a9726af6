//! Field snapshots: little-endian binary files holding physical-space
//! samples, written atomically (temp file + rename) so a crash mid-write
//! never leaves a truncated snapshot behind.
//!
//! Layout: magic `GSQG`, u32 version (= 1), u32 N, f64 box side, then N*N
//! f64 samples in row-major order.

use super::{GridSpec, SpectralField};
use crate::error::{CoreError, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"GSQG";
const VERSION: u32 = 1;

/// Writes the field's physical samples to `path`, atomically.
pub fn save_field(field: &SpectralField, path: &Path) -> Result<()> {
    let grid = field.grid();
    let samples = field.to_physical();
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(grid.n as u32)?;
        w.write_f64::<LittleEndian>(grid.l_box)?;
        for &v in samples.iter() {
            w.write_f64::<LittleEndian>(v)?;
        }
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| CoreError::Io(e.error))?;
    Ok(())
}

/// Reads a snapshot back into a spectral field.
pub fn load_field(path: &Path) -> Result<SpectralField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::FileFormat(format!(
            "bad magic {:?} in {}",
            magic,
            path.display()
        )));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(CoreError::FileFormat(format!(
            "unsupported snapshot version {version} (expected {VERSION})"
        )));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let l_box = r.read_f64::<LittleEndian>()?;
    let grid = GridSpec::with_box(n, l_box)
        .map_err(|e| CoreError::FileFormat(format!("bad snapshot header: {e}")))?;
    let mut samples = vec![0.0f64; n * n];
    for v in samples.iter_mut() {
        *v = r.read_f64::<LittleEndian>()?;
    }
    // A well-formed file ends exactly here.
    let mut trailer = [0u8; 1];
    if r.read(&mut trailer)? != 0 {
        return Err(CoreError::FileFormat(format!(
            "trailing bytes after {n}x{n} samples in {}",
            path.display()
        )));
    }
    let arr = Array2::from_shape_vec((n, n), samples)
        .map_err(|e| CoreError::FileFormat(format!("sample reshape failed: {e}")))?;
    SpectralField::from_physical(grid, &arr)
}
