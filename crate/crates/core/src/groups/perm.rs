use super::signed_perm::SignedPermutation;
use super::{GroupContext, GroupDescriptor, Key};
use crate::{Error, Result};

/// A permutation of `0..n`, as its image list. Product is composition `(ab)(k) = a(b(k))`.
pub type Perm = Box<[u8]>;

/// The symmetric group Sₙ generated by all transpositions.
///
/// Finite, so the group ring is finite dimensional; used as a test bed
/// where spectral gaps are known from representation theory.
#[derive(Clone, Debug)]
pub struct SymmetricGroup {
    n: usize,
}

impl SymmetricGroup {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=12).contains(&n) {
            return Err(Error::Unsupported(format!("S{n} needs 2 <= n <= 12")));
        }
        Ok(Self { n })
    }
}

impl GroupContext for SymmetricGroup {
    type Elem = Perm;

    fn identity(&self) -> Perm {
        (0..self.n as u8).collect()
    }

    fn mul(&self, a: &Perm, b: &Perm) -> Perm {
        b.iter().map(|&k| a[k as usize]).collect()
    }

    fn inverse(&self, a: &Perm) -> Perm {
        let mut out = vec![0u8; self.n];
        for (k, &v) in a.iter().enumerate() {
            out[v as usize] = k as u8;
        }
        out.into_boxed_slice()
    }

    fn key(&self, a: &Perm) -> Key {
        a.clone()
    }

    fn generators(&self) -> Vec<Perm> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let mut p: Vec<u8> = (0..self.n as u8).collect();
                p.swap(i, j);
                out.push(p.into_boxed_slice());
            }
        }
        out
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor::Sym(self.n)
    }

    fn symmetry_rank(&self) -> usize {
        self.n
    }

    /// Conjugation by the underlying permutation; signs act trivially.
    fn conjugate(&self, sigma: &SignedPermutation, a: &Perm) -> Perm {
        let p: Perm = sigma.perm().into();
        self.mul(&self.mul(&p, a), &self.inverse(&p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpositions_are_involutions() {
        let g = SymmetricGroup::new(4).unwrap();
        assert_eq!(g.generators().len(), 6);
        assert!(g.has_involution());
        let a: Perm = vec![1, 2, 0, 3].into();
        assert_eq!(g.mul(&a, &g.inverse(&a)), g.identity());
    }
}
