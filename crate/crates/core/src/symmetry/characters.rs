use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A partition, parts in non-increasing order, no zero parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(pub Vec<u8>);

impl Partition {
    pub fn new(mut parts: Vec<u8>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self(parts)
    }

    pub fn size(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn parts(&self) -> &[u8] {
        &self.0
    }

    /// Dimension of the irreducible Sₙ-module, by the hook length formula.
    pub fn dimension(&self) -> usize {
        let n = self.size();
        let mut hooks: u128 = 1;
        for (r, &len) in self.0.iter().enumerate() {
            for c in 0..len as usize {
                let arm = len as usize - c - 1;
                let leg = self.0[r + 1..].iter().filter(|&&l| l as usize > c).count();
                hooks *= (arm + leg + 1) as u128;
            }
        }
        ((1..=n as u128).product::<u128>() / hooks) as usize
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All partitions of `n`, in reverse lexicographic order: `(n)` first, `(1ⁿ)` last.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn go(rest: usize, max: usize, cur: &mut Vec<u8>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p as u8);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Cycle type of a permutation given as an image list.
pub fn cycle_type(perm: &[u8]) -> Partition {
    let mut seen = vec![false; perm.len()];
    let mut parts = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut k = s;
        while !seen[k] {
            seen[k] = true;
            k = perm[k] as usize;
            len += 1;
        }
        parts.push(len);
    }
    Partition::new(parts)
}

type Memo = HashMap<(Vec<u16>, Vec<u8>), i64>;

/// χ^λ(μ) by the Murnaghan–Nakayama rule.
pub fn sn_character(lambda: &Partition, mu: &Partition) -> Result<i64> {
    if lambda.size() != mu.size() {
        return Err(Error::PartitionMismatch {
            left: lambda.size(),
            right: mu.size(),
        });
    }
    // beta set: first-column hook lengths
    let l = lambda.0.len();
    let beta: Vec<u16> = lambda
        .0
        .iter()
        .enumerate()
        .map(|(i, &p)| p as u16 + (l - 1 - i) as u16)
        .collect();
    Ok(mn(beta, &mu.0, &mut Memo::new()))
}

fn mn(beta: Vec<u16>, mu: &[u8], memo: &mut Memo) -> i64 {
    let Some((&r, rest)) = mu.split_first() else {
        return 1;
    };
    let key = (beta.clone(), mu.to_vec());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let r = r as u16;
    let mut total = 0i64;
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        // removing a rim hook of length r; its height is the number of
        // beta numbers jumped over
        let height = beta.iter().filter(|&&c| c > b - r && c < b).count();
        let mut next = beta.clone();
        next[idx] = b - r;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let sign = if height % 2 == 0 { 1 } else { -1 };
        total += sign * mn(next, rest, memo);
    }
    memo.insert(key, total);
    total
}
