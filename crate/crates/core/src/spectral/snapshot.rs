//! Binary snapshots of fields and phase states.
//!
//! Layout (all little-endian): the magic bytes `SDNL`, a `u32` format
//! version, the cutoff `N` as `u32`, the smoothing exponent `s` as `f64`,
//! then `(2N+1)²` coefficients as `(re, im)` `f64` pairs in row-major order
//! over `n₁ = −N..N` (outer) and `n₂ = −N..N` (inner). A phase-state snapshot
//! is the header followed by the `u` block and then the `v` block.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use super::{PhaseState, SpectralField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SDNL";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub version: u32,
    pub cutoff: u32,
    pub s: f64,
}

fn write_header<W: Write>(w: &mut W, cutoff: usize, s: f64) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(cutoff as u32).to_le_bytes())?;
    w.write_all(&s.to_le_bytes())
}

fn write_block<W: Write>(w: &mut W, f: &SpectralField) -> io::Result<()> {
    let mut buf = Vec::with_capacity(16 * f.coeffs().len());
    for c in f.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn write_field<W: Write>(w: &mut W, f: &SpectralField, s: f64) -> Result<()> {
    write_header(w, f.cutoff(), s)?;
    write_block(w, f)?;
    Ok(())
}

pub fn write_phase<W: Write>(w: &mut W, x: &PhaseState, s: f64) -> Result<()> {
    write_header(w, x.cutoff(), s)?;
    write_block(w, &x.u)?;
    write_block(w, &x.v)?;
    Ok(())
}

/// Reads a header; `Ok(None)` on clean end of input.
pub fn read_header<R: Read>(r: &mut R) -> Result<Option<Header>> {
    let mut magic = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        let k = r.read(&mut magic[filled..])?;
        if k == 0 {
            if filled == 0 {
                return Ok(None);
            }
            return Err(Error::Format("truncated header".into()));
        }
        filled += k;
    }
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic bytes {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    r.read_exact(&mut b4)?;
    let cutoff = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let s = f64::from_le_bytes(b8);
    Ok(Some(Header { version, cutoff, s }))
}

fn read_block<R: Read>(r: &mut R, cutoff: usize) -> Result<SpectralField> {
    let count = (2 * cutoff + 1).pow(2);
    let mut raw = vec![0u8; 16 * count];
    r.read_exact(&mut raw)
        .map_err(|e| Error::Format(format!("truncated coefficient block: {e}")))?;
    let coeff = raw
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
            let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(cutoff, coeff)
}

pub fn read_field<R: Read>(r: &mut R) -> Result<(Header, SpectralField)> {
    let h = read_header(r)?.ok_or_else(|| Error::Format("empty input".into()))?;
    let f = read_block(r, h.cutoff as usize)?;
    Ok((h, f))
}

pub fn read_phase<R: Read>(r: &mut R) -> Result<Option<(Header, PhaseState)>> {
    let Some(h) = read_header(r)? else {
        return Ok(None);
    };
    let u = read_block(r, h.cutoff as usize)?;
    let v = read_block(r, h.cutoff as usize)?;
    Ok(Some((h, PhaseState { u, v })))
}

/// All phase states in a stream of concatenated snapshots.
pub fn read_phase_all<R: Read>(r: &mut R) -> Result<Vec<(Header, PhaseState)>> {
    let mut out = Vec::new();
    while let Some(x) = read_phase(r)? {
        out.push(x);
    }
    Ok(out)
}
