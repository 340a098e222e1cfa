use std::fmt;

use serde::{Deserialize, Serialize};

use super::free::FreeWord;

/// An element of the hyperoctahedral group ℤ/2 ≀ Sₙ.
///
/// Acts on free generators by `s_k -> s_{perm[k]}^{signs[k]}` (0-based `k`).
/// Composition is composition of maps: `(a * b)(s) = a(b(s))`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedPermutation {
    perm: Vec<u8>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n as u8).collect(),
            signs: vec![1; n],
        }
    }

    /// Panics if `perm` is not a permutation or a sign is not ±1.
    pub fn new(perm: Vec<u8>, signs: Vec<i8>) -> Self {
        assert_eq!(perm.len(), signs.len());
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            assert!(!seen[p as usize], "not a permutation: {perm:?}");
            seen[p as usize] = true;
        }
        assert!(signs.iter().all(|&s| s == 1 || s == -1));
        Self { perm, signs }
    }

    /// The pure permutation `k -> perm[k]`.
    pub fn from_perm(perm: Vec<u8>) -> Self {
        let n = perm.len();
        Self::new(perm, vec![1; n])
    }

    /// Inversion of the 0-based generator `k`.
    pub fn flip(n: usize, k: usize) -> Self {
        let mut s = Self::identity(n);
        s.signs[k] = -1;
        s
    }

    /// Transposition of 0-based generators `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut s = Self::identity(n);
        s.perm.swap(a, b);
        s
    }

    pub fn rank(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[u8] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| p as usize == k) && self.signs.iter().all(|&s| s == 1)
    }

    pub fn compose(&self, other: &Self) -> Self {
        let n = self.rank();
        let mut perm = vec![0u8; n];
        let mut signs = vec![1i8; n];
        for k in 0..n {
            let m = other.perm[k] as usize;
            perm[k] = self.perm[m];
            signs[k] = self.signs[m] * other.signs[k];
        }
        Self { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let n = self.rank();
        let mut perm = vec![0u8; n];
        let mut signs = vec![1i8; n];
        for k in 0..n {
            let m = self.perm[k] as usize;
            perm[m] = k as u8;
            signs[m] = self.signs[k];
        }
        Self { perm, signs }
    }

    /// Image of a free-group letter (`±(k+1)`).
    pub fn map_letter(&self, letter: i8) -> i8 {
        let k = letter.unsigned_abs() as usize - 1;
        let img = (self.perm[k] + 1) as i8 * self.signs[k];
        if letter > 0 {
            img
        } else {
            -img
        }
    }

    /// Applies the automorphism to a word; images of reduced words stay reduced.
    pub fn apply_word(&self, w: &FreeWord) -> FreeWord {
        let letters: Vec<i8> = w.letters().iter().map(|&l| self.map_letter(l)).collect();
        FreeWord::from_letters(&letters)
    }

    /// All 2ⁿ·n! elements: permutations in lexicographic order, each with
    /// sign vectors enumerated by bitmask. The identity comes first.
    pub fn enumerate(n: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity((1usize << n) * factorial(n));
        for perm in permutations(n) {
            for mask in 0..(1u32 << n) {
                let signs = (0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
                out.push(Self {
                    perm: perm.clone(),
                    signs,
                });
            }
        }
        out
    }

    /// Generators of ℤ/2 ≀ Sₙ: adjacent transpositions and the flip of the
    /// first generator.
    pub fn wreath_generators(n: usize) -> Vec<Self> {
        let mut gens: Vec<Self> = (0..n.saturating_sub(1))
            .map(|k| Self::transposition(n, k, k + 1))
            .collect();
        if n > 0 {
            gens.push(Self::flip(n, 0));
        }
        gens
    }
}

impl fmt::Debug for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for k in 0..self.rank() {
            if k > 0 {
                write!(f, " ")?;
            }
            let s = if self.signs[k] < 0 { "-" } else { "" };
            write!(f, "{}{}", s, self.perm[k] + 1)?;
        }
        write!(f, "]")
    }
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(factorial(n));
    let mut cur: Vec<u8> = (0..n as u8).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}
