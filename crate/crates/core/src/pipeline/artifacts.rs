//! Binary artifact formats. Every file starts with a four byte tag and a
//! little-endian `u32` version; all numbers are little-endian.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::groupring::DivisionTable;
use crate::sdp::SolveStatus;
use crate::symmetry::{
    ExactElem, IrrepBlock, IrrepLabel, OrbitDecomposition, PermRepresentation, ProjectionSystem,
};
use crate::{Error, Result};

const VERSION: u32 = 1;

pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new(tag: &[u8; 4]) -> Self {
        let mut buf = tag.to_vec();
        buf.extend(VERSION.to_le_bytes());
        Self { buf }
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend(v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend(v.to_le_bytes());
        self
    }

    pub fn i64(&mut self, v: i64) -> &mut Self {
        self.buf.extend(v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.buf.extend(v.to_le_bytes());
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u64(s.len() as u64);
        self.buf.extend(s.as_bytes());
        self
    }

    /// Rows, columns, then column-major entries.
    pub fn matrix(&mut self, m: &DMatrix<f64>) -> &mut Self {
        self.u64(m.nrows() as u64).u64(m.ncols() as u64);
        for v in m.iter() {
            self.f64(*v);
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], tag: &[u8; 4], path: &'a Path) -> Result<Self> {
        let mut r = Self { buf, pos: 0, path };
        if buf.len() < 8 || &buf[..4] != tag {
            return Err(r.err(format!("expected a {} file", String::from_utf8_lossy(tag))));
        }
        r.pos = 4;
        let v = r.u32()?;
        if v != VERSION {
            return Err(r.err(format!("unsupported version {v}")));
        }
        Ok(r)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Artifact {
            path: self.path.to_path_buf(),
            msg: msg.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.err("truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn count(&mut self) -> Result<usize> {
        let n = self.u64()? as usize;
        if n > self.buf.len() * 8 + 1 {
            return Err(self.err(format!("implausible length {n}")));
        }
        Ok(n)
    }

    pub fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn str(&mut self) -> Result<String> {
        let n = self.count()?;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| self.err("invalid utf-8"))
    }

    pub fn matrix(&mut self) -> Result<DMatrix<f64>> {
        let (r, c) = (self.count()?, self.count()?);
        let count = r.checked_mul(c).ok_or_else(|| self.err("size overflow"))?;
        if count * 8 > self.buf.len() - self.pos {
            return Err(self.err("truncated matrix"));
        }
        let vals: Vec<f64> = (0..count).map(|_| self.f64()).collect::<Result<_>>()?;
        Ok(DMatrix::from_vec(r, c, vals))
    }

    pub fn end(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.err("trailing bytes"));
        }
        Ok(())
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Artifact {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// `basis.bin`: shell sizes and the BFS tree `(parent, generator)`.
pub fn encode_basis(shells: &[usize], tree: &[(u32, u32)]) -> Vec<u8> {
    let mut w = Writer::new(b"SOSB");
    w.u64(shells.len() as u64);
    for &s in shells {
        w.u64(s as u64);
    }
    w.u64(tree.len() as u64);
    for &(p, g) in tree {
        w.u32(p).u32(g);
    }
    w.finish()
}

pub fn decode_basis(b: &[u8], path: &Path) -> Result<(Vec<usize>, Vec<(u32, u32)>)> {
    let mut r = Reader::new(b, b"SOSB", path)?;
    let ns = r.count()?;
    let shells = (0..ns).map(|_| r.u64().map(|v| v as usize)).collect::<Result<_>>()?;
    let nt = r.count()?;
    let tree = (0..nt)
        .map(|_| Ok((r.u32()?, r.u32()?)))
        .collect::<Result<_>>()?;
    r.end()?;
    Ok((shells, tree))
}

/// `pm.bin`: the division table.
pub fn encode_table(m: &DivisionTable) -> Vec<u8> {
    let mut w = Writer::new(b"SOSP");
    w.u64(m.size() as u64).u64(m.target_len() as u64);
    for &v in m.as_slice() {
        w.u32(v);
    }
    w.finish()
}

pub fn decode_table(b: &[u8], path: &Path) -> Result<DivisionTable> {
    let mut r = Reader::new(b, b"SOSP", path)?;
    let (n, t) = (r.count()?, r.count()?);
    let count = n.checked_mul(n).filter(|c| c * 4 <= b.len()).ok_or_else(|| r.err("bad size"))?;
    let data = (0..count).map(|_| r.u32()).collect::<Result<_>>()?;
    r.end()?;
    DivisionTable::from_raw(n, t, data)
}

/// `delta.bin`: `Δ` and `Δ²` over E⁻¹E, as integers.
pub fn encode_delta(delta: &[i64], delta_sq: &[i64]) -> Vec<u8> {
    let mut w = Writer::new(b"SOSD");
    w.u64(delta.len() as u64);
    for &v in delta.iter().chain(delta_sq) {
        w.i64(v);
    }
    w.finish()
}

pub fn decode_delta(b: &[u8], path: &Path) -> Result<(Vec<i64>, Vec<i64>)> {
    let mut r = Reader::new(b, b"SOSD", path)?;
    let n = r.count()?;
    let d = (0..n).map(|_| r.i64()).collect::<Result<_>>()?;
    let d2 = (0..n).map(|_| r.i64()).collect::<Result<_>>()?;
    r.end()?;
    Ok((d, d2))
}

/// `orbits.bin`: the orbit id of every position of E⁻¹E.
pub fn encode_orbits(o: &OrbitDecomposition) -> Vec<u8> {
    let mut w = Writer::new(b"SOSO");
    w.u64(o.orbit_of.len() as u64);
    for &v in &o.orbit_of {
        w.u32(v);
    }
    w.finish()
}

pub fn decode_orbits(b: &[u8], path: &Path) -> Result<OrbitDecomposition> {
    let mut r = Reader::new(b, b"SOSO", path)?;
    let n = r.count()?;
    let orbit_of: Vec<u32> = (0..n).map(|_| r.u32()).collect::<Result<_>>()?;
    r.end()?;
    let mut reps: Vec<u32> = Vec::new();
    let mut sizes: Vec<u32> = Vec::new();
    for (x, &o) in orbit_of.iter().enumerate() {
        let o = o as usize;
        if o == reps.len() {
            reps.push(x as u32);
            sizes.push(0);
        } else if o > reps.len() {
            return Err(Error::Artifact {
                path: path.to_path_buf(),
                msg: "orbits are not numbered by first occurrence".into(),
            });
        }
        sizes[o] += 1;
    }
    Ok(OrbitDecomposition { orbit_of, reps, sizes })
}

/// `U_pis.bin`: label (JSON), dimension, multiplicity and `U_π` per block.
pub fn encode_blocks(blocks: &[IrrepBlock]) -> Vec<u8> {
    let mut w = Writer::new(b"SOSU");
    w.u64(blocks.len() as u64);
    for b in blocks {
        w.str(&serde_json::to_string(&b.label).expect("label serializes"));
        w.u64(b.dim as u64).u64(b.multiplicity as u64);
        w.matrix(&b.u);
    }
    w.finish()
}

pub fn decode_blocks(b: &[u8], path: &Path) -> Result<Vec<IrrepBlock>> {
    let mut r = Reader::new(b, b"SOSU", path)?;
    let n = r.count()?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let label: IrrepLabel = serde_json::from_str(&r.str()?)?;
        let dim = r.count()?;
        let multiplicity = r.count()?;
        let u = r.matrix()?;
        if u.nrows() != multiplicity {
            return Err(r.err("block rows differ from its multiplicity"));
        }
        out.push(IrrepBlock {
            label,
            dim,
            multiplicity,
            u,
        });
    }
    r.end()?;
    Ok(out)
}

/// A list of matrices (`SDPblocks.bin`, `SDPmatrix.bin`, `face.bin`).
pub fn encode_matrices(ms: &[DMatrix<f64>]) -> Vec<u8> {
    let mut w = Writer::new(b"SOSM");
    w.u64(ms.len() as u64);
    for m in ms {
        w.matrix(m);
    }
    w.finish()
}

pub fn decode_matrices(b: &[u8], path: &Path) -> Result<Vec<DMatrix<f64>>> {
    let mut r = Reader::new(b, b"SOSM", path)?;
    let n = r.count()?;
    let out = (0..n).map(|_| r.matrix()).collect::<Result<_>>()?;
    r.end()?;
    Ok(out)
}

/// `lambda.bin`.
pub fn encode_lambda(l: f64) -> Vec<u8> {
    let mut w = Writer::new(b"SOSL");
    w.f64(l);
    w.finish()
}

pub fn decode_lambda(b: &[u8], path: &Path) -> Result<f64> {
    let mut r = Reader::new(b, b"SOSL", path)?;
    let l = r.f64()?;
    r.end()?;
    Ok(l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    pub label: IrrepLabel,
    pub dim: usize,
    pub denominator: String,
    pub numerators: Vec<String>,
}

pub fn encode_projections(sys: &ProjectionSystem) -> Vec<u8> {
    let recs: Vec<ProjectionRecord> = (0..sys.len())
        .map(|k| ProjectionRecord {
            label: sys.labels[k].clone(),
            dim: sys.dims[k],
            denominator: sys.elems[k].denominator().to_string(),
            numerators: sys.elems[k].numerators().iter().map(|v| v.to_string()).collect(),
        })
        .collect();
    serde_json::to_vec_pretty(&recs).expect("projections serialize")
}

pub fn decode_projections(b: &[u8], path: &Path) -> Result<ProjectionSystem> {
    let recs: Vec<ProjectionRecord> = serde_json::from_slice(b)?;
    let bad = |msg: &str| Error::Artifact {
        path: path.to_path_buf(),
        msg: msg.into(),
    };
    let mut sys = ProjectionSystem {
        labels: Vec::new(),
        dims: Vec::new(),
        elems: Vec::new(),
    };
    for r in recs {
        let den: i128 = r.denominator.parse().map_err(|_| bad("bad denominator"))?;
        let num: Vec<i128> = r
            .numerators
            .iter()
            .map(|s| s.parse().map_err(|_| bad("bad numerator")))
            .collect::<Result<_>>()?;
        if den <= 0 {
            return Err(bad("non-positive denominator"));
        }
        sys.labels.push(r.label);
        sys.dims.push(r.dim);
        sys.elems.push(ExactElem::from_parts(num, den));
    }
    Ok(sys)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveRecord {
    pub lambda: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub max_violation: f64,
}

/// `preps.bin`: ϱ_E on the generators of Σ.
pub fn encode_preps(p: &PermRepresentation) -> Vec<u8> {
    let mut w = Writer::new(b"SOSR");
    w.u64(p.points as u64).u64(p.gen_perms.len() as u64);
    for g in &p.gen_perms {
        for &x in g {
            w.u32(x);
        }
    }
    w.finish()
}

pub fn decode_preps(b: &[u8], path: &Path) -> Result<PermRepresentation> {
    let mut r = Reader::new(b, b"SOSR", path)?;
    let (points, k) = (r.count()?, r.count()?);
    let mut gen_perms = Vec::with_capacity(k);
    for _ in 0..k {
        let g: Vec<u32> = (0..points).map(|_| r.u32()).collect::<Result<_>>()?;
        let mut seen = vec![false; points];
        for &x in &g {
            if x as usize >= points || std::mem::replace(&mut seen[x as usize], true) {
                return Err(r.err("not a permutation"));
            }
        }
        gen_perms.push(g);
    }
    r.end()?;
    Ok(PermRepresentation { points, gen_perms })
}
