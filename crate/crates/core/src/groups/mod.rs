//! Finitely generated groups with a constructive word problem.
//!
//! Every supported family exposes the same contract through
//! [`GroupContext`]: identity, multiplication, inversion, a canonical byte
//! key that decides equality, a symmetric generating set, and the
//! conjugation action of the signed-permutation group ℤ/2 ≀ Sₙ.

mod abelian;
mod free;
mod perm;
mod saut;
mod signed_perm;
mod sl;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use abelian::{FreeAbelian, Lattice};
pub use free::FreeWord;
pub use perm::{Perm, SymmetricGroup};
pub use saut::{sigma_conjugate, AutElem, AutWord, SAut, Side, Transvection};
pub use signed_perm::SignedPermutation;
pub use sl::{sl_generator_set, SlMatrix, SpecialLinear};

pub(crate) use signed_perm::{factorial, permutations};

/// Canonical key of a group element: equal keys iff equal elements.
pub type Key = Box<[u8]>;

pub trait GroupContext: Send + Sync {
    type Elem: Clone + Send + Sync + fmt::Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn key(&self, a: &Self::Elem) -> Key;

    /// The symmetric generating set S = S⁻¹, in a fixed order.
    fn generators(&self) -> Vec<Self::Elem>;

    fn descriptor(&self) -> GroupDescriptor;

    /// Rank `n` of the signed permutations acting on this group.
    fn symmetry_rank(&self) -> usize;

    /// The automorphism `g -> σ g σ⁻¹` induced by a signed permutation.
    fn conjugate(&self, sigma: &SignedPermutation, a: &Self::Elem) -> Self::Elem;

    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.key(a) == self.key(b)
    }

    /// Whether some generator is its own inverse.
    fn has_involution(&self) -> bool {
        self.generators()
            .iter()
            .any(|s| self.key(s) == self.key(&self.inverse(s)))
    }
}

/// Serializable name of a supported group family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "n", rename_all = "lowercase")]
pub enum GroupDescriptor {
    /// SAut(Fₙ) with the 4n(n−1) transvections.
    Saut(usize),
    /// SLₙ(ℤ) with the 2n(n−1) elementary matrices.
    Sl(usize),
    /// Sₙ with all transpositions.
    Sym(usize),
    /// ℤⁿ with the standard generators and their inverses.
    Zn(usize),
}

impl GroupDescriptor {
    pub fn rank(&self) -> usize {
        match *self {
            Self::Saut(n) | Self::Sl(n) | Self::Sym(n) | Self::Zn(n) => n,
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Saut(n) => write!(f, "SAut(F{n})"),
            Self::Sl(n) => write!(f, "SL({n},Z)"),
            Self::Sym(n) => write!(f, "S{n}"),
            Self::Zn(n) => write!(f, "Z^{n}"),
        }
    }
}

impl std::str::FromStr for GroupDescriptor {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (family, n) = s
            .split_once(|c: char| c == ':' || c == '-' || c == '_')
            .ok_or_else(|| crate::Error::Config(format!("group `{s}`: expected family:n")))?;
        let n: usize = n
            .parse()
            .map_err(|_| crate::Error::Config(format!("group `{s}`: bad rank")))?;
        match family {
            "saut" => Ok(Self::Saut(n)),
            "sl" => Ok(Self::Sl(n)),
            "sym" | "s" => Ok(Self::Sym(n)),
            "z" | "zn" => Ok(Self::Zn(n)),
            other => Err(crate::Error::Config(format!("unknown group family `{other}`"))),
        }
    }
}
