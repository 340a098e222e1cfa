use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::groups::{factorial, permutations, SignedPermutation};
use crate::{Error, Result};

/// Which subgroup of ℤ/2 ≀ Sₙ acts on the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryKind {
    /// Only the identity; the symmetrized problem is the plain one.
    Trivial,
    /// Sₙ, permuting the indices.
    Permutations,
    /// The full wreath product ℤ/2 ≀ Sₙ.
    Signed,
}

impl std::str::FromStr for SymmetryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trivial" | "none" => Ok(Self::Trivial),
            "perm" | "permutations" | "sym" => Ok(Self::Permutations),
            "signed" | "wreath" | "signed-permutations" => Ok(Self::Signed),
            other => Err(Error::Config(format!("unknown symmetry `{other}`"))),
        }
    }
}

/// A finite group of signed permutations with its multiplication table.
///
/// Element 0 is the identity; `mul(a, b)` is the index of `a ∘ b`.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    kind: SymmetryKind,
    n: usize,
    elems: Vec<SignedPermutation>,
    index: HashMap<SignedPermutation, u32>,
    table: Vec<u16>,
    inv: Vec<u32>,
    generators: Vec<u32>,
    /// BFS tree over the generators: `elems[k] = gen ∘ elems[parent]`.
    tree: Vec<(u32, u32)>,
}

impl FiniteGroup {
    pub fn new(kind: SymmetryKind, n: usize) -> Result<Self> {
        if !(1..=8).contains(&n) {
            return Err(Error::Unsupported(format!("symmetry rank {n}")));
        }
        let (elems, gens) = match kind {
            SymmetryKind::Trivial => (vec![SignedPermutation::identity(n)], vec![]),
            SymmetryKind::Permutations => {
                let elems: Vec<_> = permutations(n).into_iter().map(SignedPermutation::from_perm).collect();
                let gens = (0..n.saturating_sub(1))
                    .map(|k| SignedPermutation::transposition(n, k, k + 1))
                    .collect();
                (elems, gens)
            }
            SymmetryKind::Signed => (
                SignedPermutation::enumerate(n),
                SignedPermutation::wreath_generators(n),
            ),
        };
        if elems.len() > u16::MAX as usize + 1 {
            return Err(Error::Unsupported(format!("|Σ| = {} too large", elems.len())));
        }
        let index: HashMap<_, _> = elems
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k as u32))
            .collect();
        let order = elems.len();
        let code_of = |s: &SignedPermutation| pack(s);
        let codes: Vec<u64> = elems.iter().map(code_of).collect();
        let by_code: HashMap<u64, u32> = codes.iter().enumerate().map(|(k, &c)| (c, k as u32)).collect();
        let mut table = vec![0u16; order * order];
        for a in 0..order {
            for b in 0..order {
                let c = compose_packed(codes[a], codes[b], n);
                table[a * order + b] = by_code[&c] as u16;
            }
        }
        let inv = (0..order)
            .map(|a| (0..order).find(|&b| table[a * order + b] == 0).unwrap() as u32)
            .collect();
        let generators: Vec<u32> = gens.iter().map(|g| index[g]).collect();
        let mut tree = vec![(u32::MAX, u32::MAX); order];
        let mut seen = vec![false; order];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in generators.iter().enumerate() {
                let y = table[g as usize * order + x] as usize;
                if !seen[y] {
                    seen[y] = true;
                    tree[y] = (x as u32, gi as u32);
                    queue.push_back(y);
                }
            }
        }
        assert!(seen.iter().all(|&s| s), "generators do not generate Σ");
        Ok(Self {
            kind,
            n,
            elems,
            index,
            table,
            inv,
            generators,
            tree,
        })
    }

    pub fn kind(&self) -> SymmetryKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn elems(&self) -> &[SignedPermutation] {
        &self.elems
    }

    pub fn elem(&self, k: usize) -> &SignedPermutation {
        &self.elems[k]
    }

    pub fn index_of(&self, s: &SignedPermutation) -> Option<usize> {
        self.index.get(s).map(|&k| k as usize)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.elems.len() + b] as usize
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// Indices of the generators used for orbit and representation work.
    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn generator_elems(&self) -> Vec<SignedPermutation> {
        self.generators.iter().map(|&g| self.elems[g as usize].clone()).collect()
    }

    pub fn tree(&self) -> &[(u32, u32)] {
        &self.tree
    }

    /// Number of conjugacy classes, by brute force.
    pub fn class_count(&self) -> usize {
        let order = self.order();
        let mut class = vec![u32::MAX; order];
        let mut count = 0;
        for x in 0..order {
            if class[x] != u32::MAX {
                continue;
            }
            for g in 0..order {
                let y = self.mul(self.mul(g, x), self.inverse(g));
                class[y] = count;
            }
            count += 1;
        }
        count as usize
    }

    /// `|Σ|` for a kind and rank without building the group.
    pub fn order_of(kind: SymmetryKind, n: usize) -> usize {
        match kind {
            SymmetryKind::Trivial => 1,
            SymmetryKind::Permutations => factorial(n),
            SymmetryKind::Signed => factorial(n) << n,
        }
    }
}

/// 4 bits per image index, then the sign mask in the top byte.
fn pack(s: &SignedPermutation) -> u64 {
    let mut c = 0u64;
    for (k, (&p, &e)) in s.perm().iter().zip(s.signs()).enumerate() {
        c |= (p as u64) << (4 * k);
        if e < 0 {
            c |= 1 << (56 + k);
        }
    }
    c
}

fn compose_packed(a: u64, b: u64, n: usize) -> u64 {
    let mut c = 0u64;
    for k in 0..n {
        let bk = (b >> (4 * k)) & 15;
        let ak = (a >> (4 * bk)) & 15;
        let sign = ((a >> (56 + bk)) ^ (b >> (56 + k))) & 1;
        c |= ak << (4 * k) | sign << (56 + k);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_agree_with_composition() {
        let g = FiniteGroup::new(SymmetryKind::Signed, 3).unwrap();
        assert_eq!(g.order(), 48);
        for a in (0..48).step_by(5) {
            for b in 0..48 {
                assert_eq!(g.elem(g.mul(a, b)), &g.elem(a).compose(g.elem(b)));
            }
            assert!(g.mul(a, g.inverse(a)) == 0);
        }
        for (k, &(p, gi)) in g.tree().iter().enumerate().skip(1) {
            assert_eq!(g.mul(g.generators()[gi as usize] as usize, p as usize), k);
        }
    }

    #[test]
    fn class_counts() {
        // ℤ/2 ≀ Sₙ has Σ p(i)p(n−i) classes; Sₙ has p(n)
        assert_eq!(FiniteGroup::new(SymmetryKind::Signed, 2).unwrap().class_count(), 5);
        assert_eq!(FiniteGroup::new(SymmetryKind::Signed, 3).unwrap().class_count(), 10);
        assert_eq!(FiniteGroup::new(SymmetryKind::Permutations, 4).unwrap().class_count(), 5);
        assert_eq!(FiniteGroup::new(SymmetryKind::Trivial, 4).unwrap().order(), 1);
    }
}
