use std::fmt;

use super::signed_perm::SignedPermutation;
use super::{GroupContext, GroupDescriptor, Key};
use crate::{Error, Result};

/// An n×n integer matrix of determinant 1, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SlMatrix {
    n: usize,
    entries: Box<[i64]>,
}

impl SlMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for k in 0..n {
            entries[k * n + k] = 1;
        }
        Self {
            n,
            entries: entries.into_boxed_slice(),
        }
    }

    /// `I + sign·e_{ij}` for 0-based `i != j`.
    pub fn elementary(n: usize, i: usize, j: usize, sign: i64) -> Self {
        let mut m = Self::identity(n);
        m.entries[i * n + j] = sign;
        m
    }

    pub fn from_rows(n: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!("{} entries for {n}x{n}", entries.len())));
        }
        let m = Self {
            n,
            entries: entries.into_boxed_slice(),
        };
        if m.det() != 1 {
            return Err(Error::Unsupported(format!("determinant {} != 1", m.det())));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = a
                        .checked_mul(other.entries[k * n + j])
                        .and_then(|p| p.checked_add(out[i * n + j]))
                        .expect("SL entry overflow");
                }
            }
        }
        Self {
            n,
            entries: out.into_boxed_slice(),
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i64 {
        bareiss_det(self.n, self.entries.iter().map(|&x| x as i128).collect()) as i64
    }

    /// The adjugate, which is the inverse for determinant 1.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        if n == 1 {
            return self.clone();
        }
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<i128> = (0..n)
                    .filter(|&r| r != j)
                    .flat_map(|r| (0..n).filter(move |&c| c != i).map(move |c| (r, c)))
                    .map(|(r, c)| self.entries[r * n + c] as i128)
                    .collect();
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                out[i * n + j] = (sign * bareiss_det(n - 1, minor)) as i64;
            }
        }
        Self {
            n,
            entries: out.into_boxed_slice(),
        }
    }
}

fn bareiss_det(n: usize, mut a: Vec<i128>) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                return 0;
            };
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}

impl fmt::Debug for SlMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// All `I ± e_{ij}`, `i != j`: 2n(n−1) matrices.
pub fn sl_generator_set(n: usize) -> Result<Vec<SlMatrix>> {
    if n < 2 {
        return Err(Error::Unsupported(format!("SL({n},Z) needs n >= 2")));
    }
    let mut out = Vec::with_capacity(2 * n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(SlMatrix::elementary(n, i, j, 1));
                out.push(SlMatrix::elementary(n, i, j, -1));
            }
        }
    }
    Ok(out)
}

/// SLₙ(ℤ) with elementary generators; signed permutation matrices act by
/// conjugation.
#[derive(Clone, Debug)]
pub struct SpecialLinear {
    n: usize,
}

impl SpecialLinear {
    pub fn new(n: usize) -> Result<Self> {
        sl_generator_set(n)?;
        Ok(Self { n })
    }
}

impl GroupContext for SpecialLinear {
    type Elem = SlMatrix;

    fn identity(&self) -> SlMatrix {
        SlMatrix::identity(self.n)
    }

    fn mul(&self, a: &SlMatrix, b: &SlMatrix) -> SlMatrix {
        a.mul(b)
    }

    fn inverse(&self, a: &SlMatrix) -> SlMatrix {
        a.inverse()
    }

    fn key(&self, a: &SlMatrix) -> Key {
        // offset big-endian, so byte order is numeric order
        a.entries
            .iter()
            .flat_map(|&x| ((x as u64) ^ (1 << 63)).to_be_bytes())
            .collect()
    }

    fn generators(&self) -> Vec<SlMatrix> {
        sl_generator_set(self.n).expect("n >= 2")
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor::Sl(self.n)
    }

    fn symmetry_rank(&self) -> usize {
        self.n
    }

    /// `D A D⁻¹` with `D e_k = ε_k e_{π(k)}`.
    fn conjugate(&self, sigma: &SignedPermutation, a: &SlMatrix) -> SlMatrix {
        let n = self.n;
        let (p, s) = (sigma.perm(), sigma.signs());
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                out[p[i] as usize * n + p[j] as usize] = (s[i] * s[j]) as i64 * a.get(i, j);
            }
        }
        SlMatrix {
            n,
            entries: out.into_boxed_slice(),
        }
    }
}
