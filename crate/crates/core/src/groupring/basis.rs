use std::collections::HashMap;

use rayon::prelude::*;

use crate::groups::{GroupContext, Key};
use crate::{Error, Result};

/// Marker for the root of the BFS tree.
pub const ROOT: u32 = u32::MAX;

/// An ordered ball `B_r(e, S)`.
///
/// Elements are sorted by word length, then by canonical key bytes, so
/// position 0 is `e` and positions `1..=|S|` are the generators. Every
/// element except `e` records the BFS parent and generator index it was
/// reached by; replaying that tree rebuilds the basis from disk.
#[derive(Clone, Debug)]
pub struct Basis<T> {
    elems: Vec<T>,
    index: HashMap<Key, u32>,
    /// `shells[k]` is `|B_k|`.
    shells: Vec<usize>,
    tree: Vec<(u32, u32)>,
}

impl<T: Clone> Basis<T> {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.shells.len() - 1
    }

    /// Cumulative sizes `|B_0|, |B_1|, …, |B_r|`.
    pub fn shell_sizes(&self) -> &[usize] {
        &self.shells
    }

    pub fn elems(&self) -> &[T] {
        &self.elems
    }

    pub fn elem(&self, i: usize) -> &T {
        &self.elems[i]
    }

    pub fn tree(&self) -> &[(u32, u32)] {
        &self.tree
    }

    pub fn position_by_key(&self, key: &[u8]) -> Option<usize> {
        self.index.get(key).map(|&i| i as usize)
    }

    pub fn position<G: GroupContext<Elem = T>>(&self, ctx: &G, g: &T) -> Option<usize> {
        self.position_by_key(&ctx.key(g))
    }

    /// Word length of each element.
    pub fn word_lengths(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len()];
        for (k, w) in self.shells.windows(2).enumerate() {
            out[w[0]..w[1]].fill(k as u8 + 1);
        }
        out
    }

    /// The sub-ball `B_r`, which is a prefix of this one.
    pub fn prefix(&self, r: usize) -> Basis<T> {
        assert!(r <= self.radius(), "prefix radius {r} > {}", self.radius());
        let n = self.shells[r];
        let elems = self.elems[..n].to_vec();
        let index = self
            .index
            .iter()
            .filter(|(_, &v)| (v as usize) < n)
            .map(|(k, &v)| (k.clone(), v))
            .collect();
        Basis {
            elems,
            index,
            shells: self.shells[..=r].to_vec(),
            tree: self.tree[..n].to_vec(),
        }
    }

    /// `inv[k]` = position of `𝐱ₖ⁻¹`; balls are closed under inversion.
    pub fn inverse_positions<G: GroupContext<Elem = T>>(&self, ctx: &G) -> Result<Vec<u32>> {
        self.elems
            .iter()
            .map(|g| {
                self.position(ctx, &ctx.inverse(g))
                    .map(|p| p as u32)
                    .ok_or_else(|| Error::Unsupported("basis not closed under inversion".into()))
            })
            .collect()
    }

    /// Rebuilds a basis by replaying a stored BFS tree.
    pub fn from_tree<G: GroupContext<Elem = T>>(
        ctx: &G,
        tree: Vec<(u32, u32)>,
        shells: Vec<usize>,
    ) -> Result<Self> {
        let gens = ctx.generators();
        if tree.is_empty() || tree[0] != (ROOT, ROOT) || shells.last() != Some(&tree.len()) {
            return Err(Error::Dimension("malformed basis tree".into()));
        }
        let mut elems = Vec::with_capacity(tree.len());
        let mut index = HashMap::with_capacity(tree.len());
        for (k, &(parent, g)) in tree.iter().enumerate() {
            let x = if k == 0 {
                ctx.identity()
            } else {
                if parent as usize >= k || g as usize >= gens.len() {
                    return Err(Error::Dimension(format!("bad tree entry at {k}")));
                }
                ctx.mul(&elems[parent as usize], &gens[g as usize])
            };
            if index.insert(ctx.key(&x), k as u32).is_some() {
                return Err(Error::Dimension(format!("duplicate element at {k}")));
            }
            elems.push(x);
        }
        Ok(Self {
            elems,
            index,
            shells,
            tree,
        })
    }
}

/// `B_r(e, S)` with no size limit.
pub fn ball<G: GroupContext>(ctx: &G, r: usize) -> Result<Basis<G::Elem>> {
    ball_with_limit(ctx, r, usize::MAX)
}

/// `B_r(e, S)`, failing once more than `limit` elements have been found.
pub fn ball_with_limit<G: GroupContext>(
    ctx: &G,
    r: usize,
    limit: usize,
) -> Result<Basis<G::Elem>> {
    const CHUNK: usize = 4096;
    let gens = ctx.generators();
    let e = ctx.identity();
    let mut index = HashMap::new();
    index.insert(ctx.key(&e), 0u32);
    let mut elems = vec![e];
    let mut tree = vec![(ROOT, ROOT)];
    let mut shells = vec![1usize];
    for _ in 0..r {
        let start = shells.len().checked_sub(2).map_or(0, |k| shells[k]);
        let end = elems.len();
        let mut fresh: HashMap<Key, usize> = HashMap::new();
        let mut shell: Vec<(Key, u32, u32, G::Elem)> = Vec::new();
        for lo in (start..end).step_by(CHUNK) {
            let hi = (lo + CHUNK).min(end);
            let products: Vec<(Key, u32, u32, G::Elem)> = (lo..hi)
                .into_par_iter()
                .flat_map_iter(|p| {
                    let x = &elems[p];
                    gens.iter().enumerate().map(move |(g, s)| {
                        let y = ctx.mul(x, s);
                        (ctx.key(&y), p as u32, g as u32, y)
                    })
                })
                .collect();
            for item in products {
                if index.contains_key(&item.0) || fresh.contains_key(&item.0) {
                    continue;
                }
                fresh.insert(item.0.clone(), shell.len());
                shell.push(item);
                if end + shell.len() > limit {
                    return Err(Error::MemoryBudget {
                        limit,
                        found: end + shell.len(),
                    });
                }
            }
        }
        drop(fresh);
        shell.sort_by(|a, b| a.0.cmp(&b.0));
        for (key, parent, g, y) in shell {
            index.insert(key, elems.len() as u32);
            elems.push(y);
            tree.push((parent, g));
        }
        shells.push(elems.len());
    }
    Ok(Basis {
        elems,
        index,
        shells,
        tree,
    })
}
