//! Little-endian helpers shared by the table, dataset and model file formats.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};

pub(crate) fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], version: u8) -> io::Result<()> {
    w.write_all(magic)?;
    w.write_all(&[version])
}

pub(crate) fn read_header<R: Read>(
    r: &mut R,
    kind: &'static str,
    magic: &[u8; 4],
    version: u8,
) -> Result<()> {
    let mut got = [0u8; 4];
    read_exact(r, kind, &mut got)?;
    if &got != magic {
        return Err(Error::format(kind, format!("bad magic {got:?}")));
    }
    let v = read_u8(r, kind)?;
    if v != version {
        return Err(Error::format(kind, format!("unsupported version {v}")));
    }
    Ok(())
}

pub(crate) fn read_exact<R: Read>(r: &mut R, kind: &'static str, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::format(kind, "truncated"),
        _ => Error::Io(e),
    })
}

pub(crate) fn read_u8<R: Read>(r: &mut R, kind: &'static str) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, kind, &mut b)?;
    Ok(b[0])
}

pub(crate) fn read_u32<R: Read>(r: &mut R, kind: &'static str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, kind, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R, kind: &'static str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, kind, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R, kind: &'static str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, kind, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, kind: &'static str, count: usize) -> Result<Vec<f64>> {
    let mut raw = vec![0u8; count * 8];
    read_exact(r, kind, &mut raw)?;
    Ok(raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let mut raw = Vec::with_capacity(values.len() * 8);
    for v in values {
        raw.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&raw)
}

/// Fail if the reader still has bytes left.
pub(crate) fn expect_eof<R: Read>(r: &mut R, kind: &'static str) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => Err(Error::format(kind, "trailing bytes")),
    }
}
