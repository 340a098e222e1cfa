//! `witness.bin`: magic, version, `rows`, `cols`, then `(lo, hi)` pairs
//! row-major, all little-endian.

use std::path::Path;

use super::SosWitness;
use crate::interval::Interval;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SOSQ";
const VERSION: u32 = 1;

pub fn witness_to_bytes(w: &SosWitness) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * w.entries.len());
    out.extend(MAGIC);
    out.extend(VERSION.to_le_bytes());
    out.extend((w.rows as u64).to_le_bytes());
    out.extend((w.cols as u64).to_le_bytes());
    for e in &w.entries {
        out.extend(e.lo().to_le_bytes());
        out.extend(e.hi().to_le_bytes());
    }
    out
}

pub fn witness_from_bytes(b: &[u8]) -> std::result::Result<SosWitness, String> {
    if b.len() < 24 || &b[..4] != MAGIC {
        return Err("not a witness file".into());
    }
    let u32_at = |k: usize| u32::from_le_bytes(b[k..k + 4].try_into().unwrap());
    let u64_at = |k: usize| u64::from_le_bytes(b[k..k + 8].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(format!("unsupported witness version {}", u32_at(4)));
    }
    let rows = u64_at(8) as usize;
    let cols = u64_at(16) as usize;
    let count = rows.checked_mul(cols).ok_or("size overflow")?;
    if b.len() != 24 + 16 * count {
        return Err(format!("expected {} bytes, found {}", 24 + 16 * count, b.len()));
    }
    let mut entries = Vec::with_capacity(count);
    for k in 0..count {
        let lo = f64::from_le_bytes(b[24 + 16 * k..32 + 16 * k].try_into().unwrap());
        let hi = f64::from_le_bytes(b[32 + 16 * k..40 + 16 * k].try_into().unwrap());
        if !(lo <= hi) {
            return Err(format!("entry {k} is not an interval"));
        }
        entries.push(Interval::new(lo, hi));
    }
    Ok(SosWitness { rows, cols, entries })
}

pub fn write_witness(w: &SosWitness, path: &Path) -> Result<Vec<u8>> {
    let bytes = witness_to_bytes(w);
    std::fs::write(path, &bytes)?;
    Ok(bytes)
}

pub fn read_witness(path: &Path) -> Result<SosWitness> {
    let bytes = std::fs::read(path)?;
    witness_from_bytes(&bytes).map_err(|msg| Error::Artifact {
        path: path.to_path_buf(),
        msg,
    })
}
