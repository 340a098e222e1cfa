use super::signed_perm::SignedPermutation;
use super::{GroupContext, GroupDescriptor, Key};
use crate::{Error, Result};

pub type Lattice = Box<[i64]>;

/// ℤⁿ with generators `±e_k`. Amenable, so it never has a positive gap.
#[derive(Clone, Debug)]
pub struct FreeAbelian {
    n: usize,
}

impl FreeAbelian {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Unsupported("Z^0".into()));
        }
        Ok(Self { n })
    }
}

impl GroupContext for FreeAbelian {
    type Elem = Lattice;

    fn identity(&self) -> Lattice {
        vec![0; self.n].into_boxed_slice()
    }

    fn mul(&self, a: &Lattice, b: &Lattice) -> Lattice {
        a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
    }

    fn inverse(&self, a: &Lattice) -> Lattice {
        a.iter().map(|x| -x).collect()
    }

    fn key(&self, a: &Lattice) -> Key {
        a.iter()
            .flat_map(|&x| ((x as u64) ^ (1 << 63)).to_be_bytes())
            .collect()
    }

    fn generators(&self) -> Vec<Lattice> {
        let mut out = Vec::with_capacity(2 * self.n);
        for k in 0..self.n {
            for s in [1, -1] {
                let mut v = vec![0; self.n];
                v[k] = s;
                out.push(v.into_boxed_slice());
            }
        }
        out
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor::Zn(self.n)
    }

    fn symmetry_rank(&self) -> usize {
        self.n
    }

    fn conjugate(&self, sigma: &SignedPermutation, a: &Lattice) -> Lattice {
        let mut out = vec![0; self.n];
        for k in 0..self.n {
            out[sigma.perm()[k] as usize] = sigma.signs()[k] as i64 * a[k];
        }
        out.into_boxed_slice()
    }
}
