use serde::{Deserialize, Serialize};

use crate::groupring::Basis;
use crate::groups::{GroupContext, SignedPermutation};
use crate::{Error, Result};

/// Partition of basis positions into Σ-orbits.
///
/// Orbits are numbered by their smallest position, which is also the
/// representative; so the orbit of `e` is orbit 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDecomposition {
    pub orbit_of: Vec<u32>,
    pub reps: Vec<u32>,
    pub sizes: Vec<u32>,
}

impl OrbitDecomposition {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn points(&self) -> usize {
        self.orbit_of.len()
    }

    /// Positions of each orbit, ascending.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self.sizes.iter().map(|&s| Vec::with_capacity(s as usize)).collect();
        for (x, &o) in self.orbit_of.iter().enumerate() {
            out[o as usize].push(x as u32);
        }
        out
    }

    /// The decomposition of the first `len` points, which must be a union of orbits.
    pub fn restrict(&self, len: usize) -> Result<Self> {
        let orbits = self.orbit_of[..len].iter().map(|&o| o as usize).max().map_or(0, |m| m + 1);
        for o in 0..orbits {
            if self.reps[o] as usize >= len {
                return Err(Error::ActionNotClosed { position: self.reps[o] as usize });
            }
        }
        let counted = self.sizes[..orbits].iter().map(|&s| s as usize).sum::<usize>();
        if counted != len {
            return Err(Error::ActionNotClosed { position: len });
        }
        Ok(Self {
            orbit_of: self.orbit_of[..len].to_vec(),
            reps: self.reps[..orbits].to_vec(),
            sizes: self.sizes[..orbits].to_vec(),
        })
    }
}

/// The permutation `x ↦ σ x σ⁻¹` of basis positions.
pub fn action_on_basis<G: GroupContext>(
    ctx: &G,
    basis: &Basis<G::Elem>,
    sigma: &SignedPermutation,
) -> Result<Vec<u32>> {
    basis
        .elems()
        .iter()
        .enumerate()
        .map(|(k, x)| {
            basis
                .position(ctx, &ctx.conjugate(sigma, x))
                .map(|p| p as u32)
                .ok_or(Error::ActionNotClosed { position: k })
        })
        .collect()
}

/// Orbits of the group generated by `gens` acting on `0..points`.
pub fn orbit_decompose(points: usize, gens: &[Vec<u32>]) -> OrbitDecomposition {
    let mut parent: Vec<u32> = (0..points as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let up = parent[parent[x as usize] as usize];
            parent[x as usize] = up;
            x = up;
        }
        x
    }
    for g in gens {
        assert_eq!(g.len(), points);
        for (x, &y) in g.iter().enumerate() {
            let (a, b) = (find(&mut parent, x as u32), find(&mut parent, y));
            if a != b {
                // the smaller root wins, so roots are orbit minima
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi as usize] = lo;
            }
        }
    }
    let mut id = vec![u32::MAX; points];
    let mut orbit_of = vec![0u32; points];
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    for x in 0..points {
        let r = find(&mut parent, x as u32) as usize;
        if id[r] == u32::MAX {
            id[r] = reps.len() as u32;
            reps.push(r as u32);
            sizes.push(0);
        }
        orbit_of[x] = id[r];
        sizes[id[r] as usize] += 1;
    }
    OrbitDecomposition {
        orbit_of,
        reps,
        sizes,
    }
}

/// Σ-orbits of a basis, using only the generators of Σ.
pub fn basis_orbits<G: GroupContext>(
    ctx: &G,
    basis: &Basis<G::Elem>,
    generators: &[SignedPermutation],
) -> Result<OrbitDecomposition> {
    let gens: Vec<Vec<u32>> = generators
        .iter()
        .map(|s| action_on_basis(ctx, basis, s))
        .collect::<Result<_>>()?;
    Ok(orbit_decompose(basis.len(), &gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::ball;
    use crate::groups::{SAut, Transvection, Side};

    #[test]
    fn saut2_generators_form_one_orbit() {
        let g = SAut::new(2).unwrap();
        let b = ball(&g, 2).unwrap();
        let orb = basis_orbits(&g, &b, &SignedPermutation::wreath_generators(2)).unwrap();
        assert_eq!(orb.orbit_of[0], 0);
        assert_eq!(orb.sizes[0], 1);
        let t = g.letter(Transvection::new(Side::Right, 1, 2, 1, 2).unwrap());
        let o = orb.orbit_of[b.position(&g, &t).unwrap()];
        assert_eq!(orb.sizes[o as usize], 8);
        for k in 1..=8 {
            assert_eq!(orb.orbit_of[k], o);
        }
        // orbits of B₁ are a prefix
        let small = orb.restrict(9).unwrap();
        assert_eq!(small.len(), 2);
        assert!(orb.restrict(10).is_err());
    }

    #[test]
    fn orbits_agree_with_brute_force() {
        let g = SAut::new(3).unwrap();
        let b = ball(&g, 2).unwrap();
        let orb = basis_orbits(&g, &b, &SignedPermutation::wreath_generators(3)).unwrap();
        let all: Vec<Vec<u32>> = SignedPermutation::enumerate(3)
            .iter()
            .map(|s| action_on_basis(&g, &b, s).unwrap())
            .collect();
        for x in 0..b.len() {
            let mut orbit: Vec<u32> = all.iter().map(|p| p[x]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            assert_eq!(orbit.len(), orb.sizes[orb.orbit_of[x] as usize] as usize);
            assert!(orbit.iter().all(|&y| orb.orbit_of[y as usize] == orb.orbit_of[x]));
            assert_eq!(orb.reps[orb.orbit_of[x] as usize], orbit[0]);
        }
    }
}
