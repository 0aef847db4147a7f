//! LAPF field snapshots.
//!
//! Little-endian layout: magic `LAPF`, `u32` version (1), `u32` dimension,
//! `u32` component count, `u32` points per axis, `f64` box length, then
//! `m * N^n` samples as interleaved `f64` (re, im) pairs, component-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Field, Grid};
use crate::error::{LapError, Result};

pub const LAPF_MAGIC: &[u8; 4] = b"LAPF";
pub const LAPF_VERSION: u32 = 1;

pub fn write_field_to(field: &Field, mut w: impl Write) -> Result<()> {
    let grid = field.grid();
    w.write_all(LAPF_MAGIC)?;
    w.write_all(&LAPF_VERSION.to_le_bytes())?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(field.components() as u32).to_le_bytes())?;
    w.write_all(&(grid.points() as u32).to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_field_from(mut r: impl Read) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != LAPF_MAGIC {
        return Err(LapError::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != LAPF_VERSION {
        return Err(LapError::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let components = read_u32(&mut r)? as usize;
    let points = read_u32(&mut r)? as usize;
    let length = read_f64(&mut r)?;
    let grid = Grid::new(dim, points, length).map_err(|e| LapError::Format(e.to_string()))?;
    if components == 0 {
        return Err(LapError::Format("zero components".into()));
    }
    let count = components * grid.len();
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes)
        .map_err(|_| LapError::Format(format!("truncated payload, expected {count} samples")))?;
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Field::from_values(grid, components, values)
}

pub fn write_field(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    write_field_to(field, BufWriter::new(File::create(path)?))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_bit_exact() {
        let g = Grid::new(2, 8, 1.5).unwrap();
        let f = Field::from_fn(g, 2, |x, c| Complex64::new(x[0] + c as f64, -x[1]));
        let mut buf = Vec::new();
        write_field_to(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"LAPF");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..16], &2u32.to_le_bytes());
        assert_eq!(&buf[16..20], &8u32.to_le_bytes());
        assert_eq!(&buf[20..28], &1.5f64.to_le_bytes());
        assert_eq!(buf.len(), 28 + 2 * 64 * 16);
        // second sample of component 0 sits at x = (0, h)
        assert_eq!(&buf[28 + 16..28 + 24], &0.0f64.to_le_bytes());
        assert_eq!(&buf[28 + 24..28 + 32], &(-1.5f64 / 8.0).to_le_bytes());
        let back = read_field_from(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(matches!(read_field_from(&b"NOPE"[..]), Err(LapError::Format(_))));
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut buf = Vec::new();
        write_field_to(&Field::zeros(g, 1), &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_field_from(&buf[..]).is_err());
        let mut bad = Vec::new();
        write_field_to(&Field::zeros(g, 1), &mut bad).unwrap();
        bad[4] = 2;
        assert!(read_field_from(&bad[..]).is_err());
    }
}
