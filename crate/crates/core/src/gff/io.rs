//! LFPF binary field files.
//!
//! Layout (little-endian): magic `LFPF`, version `u16`, kind `u8` (0 torus, 1 dirichlet),
//! `n: u32`, `spacing: f64`, `seed: u64`, then `n^2` `f64` values in row-major order.
//! The origin is not stored; readers place the unit square at the center of the domain
//! (see [`LatticeSpec::centered`]).

use std::io::{Read, Write};

use super::{FieldKind, FieldSample};
use crate::error::{LfppError, Result};
use crate::lattice::LatticeSpec;

pub const MAGIC: &[u8; 4] = b"LFPF";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 8 + 8;

pub fn write_field<W: Write>(field: &FieldSample, mut w: W) -> Result<()> {
    let n = field.spec.n();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * n * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(match field.kind {
        FieldKind::TorusWholePlane => 0,
        FieldKind::DirichletSquare => 1,
    });
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&field.spec.spacing().to_le_bytes());
    buf.extend_from_slice(&field.seed.to_le_bytes());
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Header fields of an LFPF file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Header {
    pub version: u16,
    pub kind: FieldKind,
    pub n: usize,
    pub spacing: f64,
    pub seed: u64,
}

pub fn read_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(LfppError::Format("truncated LFPF header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(LfppError::Format("bad magic, not an LFPF file".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(LfppError::Format(format!("unsupported LFPF version {version}")));
    }
    let kind = match bytes[6] {
        0 => FieldKind::TorusWholePlane,
        1 => FieldKind::DirichletSquare,
        k => return Err(LfppError::Format(format!("unknown field kind {k}"))),
    };
    let n = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let spacing = f64::from_le_bytes(bytes[11..19].try_into().unwrap());
    let seed = u64::from_le_bytes(bytes[19..27].try_into().unwrap());
    Ok(Header { version, kind, n, spacing, seed })
}

pub fn read_field<R: Read>(mut r: R) -> Result<FieldSample> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let h = read_header(&bytes)?;
    let spec = LatticeSpec::centered(h.n, h.spacing)?;
    let expected = HEADER_LEN + 8 * h.n * h.n;
    if bytes.len() != expected {
        return Err(LfppError::Format(format!("LFPF payload has {} bytes, expected {expected}", bytes.len())));
    }
    let values: Vec<f64> =
        bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LfppError::Format("non-finite field value".into()));
    }
    Ok(FieldSample {
        spec,
        values,
        kind: h.kind,
        seed: h.seed,
        mean_removed: h.kind == FieldKind::TorusWholePlane,
        derived: false,
    })
}
