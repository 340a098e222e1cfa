use rayon::prelude::*;

use super::basis::Basis;
use crate::groups::GroupContext;
use crate::{Error, Result};

/// `M[i, j]` = position of `𝐱ᵢ⁻¹𝐱ⱼ` in the target basis, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionTable {
    n: usize,
    target_len: usize,
    data: Vec<u32>,
}

impl DivisionTable {
    /// Wraps a raw table after checking shape and range.
    pub fn from_raw(n: usize, target_len: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "table has {} entries, expected {n}²",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&k| k as usize >= target_len) {
            return Err(Error::Dimension(format!("table entry {bad} >= {target_len}")));
        }
        Ok(Self {
            n,
            target_len,
            data,
        })
    }

    /// Size of the source basis E.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Size of the target basis E⁻¹E.
    pub fn target_len(&self) -> usize {
        self.target_len
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.data[i * self.n + j] as usize
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    /// For each target position, the `(i, j)` pairs mapping to it in row-major order.
    pub fn preimages(&self) -> Vec<Vec<(u32, u32)>> {
        let mut out = vec![Vec::new(); self.target_len];
        for i in 0..self.n {
            for (j, &k) in self.row(i).iter().enumerate() {
                out[k as usize].push((i as u32, j as u32));
            }
        }
        out
    }
}

/// Populates `M[i, j]` for `i, j` in `E` against `E2 ⊇ E⁻¹E`.
pub fn division_table<G: GroupContext>(
    ctx: &G,
    e: &Basis<G::Elem>,
    e2: &Basis<G::Elem>,
) -> Result<DivisionTable> {
    let n = e.len();
    let rows: Vec<Result<Vec<u32>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let inv = ctx.inverse(e.elem(i));
            (0..n)
                .map(|j| {
                    let q = ctx.mul(&inv, e.elem(j));
                    e2.position(ctx, &q)
                        .map(|k| k as u32)
                        .ok_or(Error::MissingQuotient { i, j })
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        data.extend(row?);
    }
    DivisionTable::from_raw(n, e2.len(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::ball;
    use crate::groups::{SAut, SpecialLinear};
    use rand::{Rng, SeedableRng};

    #[test]
    fn table_identities() {
        let g = SpecialLinear::new(2).unwrap();
        let e2 = ball(&g, 4).unwrap();
        let e = e2.prefix(2);
        let m = division_table(&g, &e, &e2).unwrap();
        assert_eq!(m.get(0, 0), 0);
        let inv = e.inverse_positions(&g).unwrap();
        for i in 0..e.len() {
            assert_eq!(m.get(i, i), 0);
            assert_eq!(m.get(0, i), i);
            assert_eq!(m.get(i, 0), inv[i] as usize);
        }
    }

    #[test]
    fn saut2_spot_checks_against_direct_multiplication() {
        let g = SAut::new(2).unwrap();
        let e2 = ball(&g, 4).unwrap();
        let e = e2.prefix(2);
        let m = division_table(&g, &e, &e2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let (i, j) = (rng.gen_range(0..e.len()), rng.gen_range(0..e.len()));
            let direct = g.mul(&g.inverse(e.elem(i)), e.elem(j));
            assert!(g.eq(e2.elem(m.get(i, j)), &direct));
        }
    }

    #[test]
    fn too_small_target_is_reported() {
        let g = SAut::new(2).unwrap();
        let e2 = ball(&g, 3).unwrap();
        let e = e2.prefix(2);
        assert!(matches!(
            division_table(&g, &e, &e2),
            Err(Error::MissingQuotient { .. })
        ));
    }
}
