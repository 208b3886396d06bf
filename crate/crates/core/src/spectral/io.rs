//! Binary field files (`.o2df`).
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `O2DF` |
//! | 4 | version `u32` |
//! | 1 | rank `u8`: number of components (1, 2 or 3) |
//! | 4 | `n` as `u32` |
//! | rank · n² · 16 | per component, row-major `(re, im)` pairs of `f64` |
//!
//! A file may hold several records back to back; solver checkpoints store
//! the velocity record followed by the stress record.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::{AnyField, SpectralScalar, SpectralSymTensor, SpectralVector};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"O2DF";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_record<W: Write>(w: &mut W, field: &AnyField) -> Result<()> {
    let n = field.grid().n();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[field.rank()])?;
    w.write_all(&(n as u32).to_le_bytes())?;
    for comp in field.scalars() {
        for c in comp.coeffs() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads one record; `Ok(None)` at a clean end of stream.
pub fn read_record<R: Read>(r: &mut R) -> Result<Option<AnyField>> {
    let mut magic = [0u8; 4];
    match read_exact_or_eof(r, &mut magic)? {
        false => return Ok(None),
        true => {}
    }
    if &magic != MAGIC {
        return Err(Error::Format("not an o2df file".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(truncated)?;
    let version = u32::from_le_bytes(b4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported o2df version {version}")));
    }
    let mut rank = [0u8; 1];
    r.read_exact(&mut rank).map_err(truncated)?;
    r.read_exact(&mut b4).map_err(truncated)?;
    let n = u32::from_le_bytes(b4) as usize;
    let grid = TorusGrid::new(n).map_err(|e| Error::Format(format!("bad grid size: {e}")))?;
    let mut comps = Vec::with_capacity(rank[0] as usize);
    let mut b8 = [0u8; 8];
    for _ in 0..rank[0] {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8).map_err(truncated)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8).map_err(truncated)?;
            let im = f64::from_le_bytes(b8);
            coeffs.push(Complex64::new(re, im));
        }
        comps.push(SpectralScalar::from_coeffs(&grid, coeffs)?);
    }
    let mut it = comps.into_iter();
    let field = match rank[0] {
        1 => AnyField::Scalar(it.next().unwrap()),
        2 => AnyField::Vector(SpectralVector {
            x: it.next().unwrap(),
            y: it.next().unwrap(),
        }),
        3 => AnyField::Tensor(SpectralSymTensor {
            xx: it.next().unwrap(),
            xy: it.next().unwrap(),
            yy: it.next().unwrap(),
        }),
        r => return Err(Error::Format(format!("invalid rank {r}"))),
    };
    Ok(Some(field))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated o2df record".into())
    } else {
        Error::Io(e)
    }
}

fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(Error::Format("not an o2df file".into())),
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

pub fn write_fields(path: &Path, fields: &[AnyField]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for f in fields {
        write_record(&mut w, f)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every record in a file. An empty file is a format error.
pub fn read_fields(path: &Path) -> Result<Vec<AnyField>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(f) = read_record(&mut r)? {
        out.push(f);
    }
    if out.is_empty() {
        return Err(Error::Format("not an o2df file".into()));
    }
    Ok(out)
}
