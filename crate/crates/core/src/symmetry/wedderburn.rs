use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::ExactElem;
use super::finite::FiniteGroup;
use super::orbits::{action_on_basis, OrbitDecomposition};
use super::projections::{IrrepLabel, ProjectionSystem};
use crate::groupring::Basis;
use crate::groups::GroupContext;
use crate::linalg::sym_eigen;
use crate::{Error, Result};

/// ϱ_E: the permutations of basis positions induced by Σ's generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermRepresentation {
    pub points: usize,
    pub gen_perms: Vec<Vec<u32>>,
}

impl PermRepresentation {
    pub fn new<G: GroupContext>(ctx: &G, basis: &Basis<G::Elem>, sigma: &FiniteGroup) -> Result<Self> {
        let gen_perms = sigma
            .generator_elems()
            .iter()
            .map(|s| action_on_basis(ctx, basis, s))
            .collect::<Result<_>>()?;
        Ok(Self {
            points: basis.len(),
            gen_perms,
        })
    }

    /// `ϱ(σ)` for every element of Σ, indexed like `sigma.elems()`.
    pub fn expand(&self, sigma: &FiniteGroup) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); sigma.order()];
        out[0] = (0..self.points as u32).collect();
        // BFS order guarantees parents come first
        let mut order: Vec<usize> = (1..sigma.order()).collect();
        let depth = |mut k: usize| {
            let mut d = 0;
            while k != 0 {
                k = sigma.tree()[k].0 as usize;
                d += 1;
            }
            d
        };
        order.sort_by_key(|&k| depth(k));
        for k in order {
            let (parent, g) = sigma.tree()[k];
            let gp = &self.gen_perms[g as usize];
            out[k] = out[parent as usize].iter().map(|&x| gp[x as usize]).collect();
        }
        out
    }
}

/// Cutoffs for deciding numerical rank of `ϱ_E(p)`, relative to its largest singular value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankTolerance {
    pub cutoff: f64,
    pub guard_low: f64,
    pub guard_high: f64,
    /// Orbits up to this size get a full eigendecomposition; larger ones a randomized range finder.
    pub dense_limit: usize,
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self {
            cutoff: 1e-8,
            guard_low: 1e-10,
            guard_high: 1e-6,
            dense_limit: 256,
        }
    }
}

/// One Wedderburn block: `U` has orthonormal rows spanning `im ϱ_E(p)`.
#[derive(Clone, Debug)]
pub struct IrrepBlock {
    pub label: IrrepLabel,
    pub dim: usize,
    pub multiplicity: usize,
    /// `multiplicity × |E|`.
    pub u: DMatrix<f64>,
}

const OVERSAMPLE: usize = 8;

/// `tr ϱ_O(p) = Σ_σ p_σ |Fix_O(σ)|`, exactly; it equals the rank since `p` is idempotent.
pub fn exact_multiplicity(p: &ExactElem, reps: &[Vec<u32>], members: &[u32]) -> Result<usize> {
    let mut num = 0i128;
    for k in p.support() {
        let fixed = members.iter().filter(|&&x| reps[k][x as usize] == x).count() as i128;
        num += p.numerators()[k] * fixed;
    }
    let den = p.denominator();
    if num % den != 0 || num < 0 {
        return Err(Error::ProjectionInvariant(format!("trace {num}/{den} is not a rank")));
    }
    Ok((num / den) as usize)
}

/// Orthonormal basis of `im ϱ_O(p)` restricted to one orbit, as columns in local coordinates.
fn orbit_image(
    p: &ExactElem,
    reps: &[Vec<u32>],
    members: &[u32],
    local: &[u32],
    expected: usize,
    tol: &RankTolerance,
    seed: u64,
    label: &IrrepLabel,
) -> Result<DMatrix<f64>> {
    let s = members.len();
    let mut b = DMatrix::<f64>::zeros(s, s);
    for k in p.support() {
        let c = p.coeff_f64(k);
        let r = &reps[k];
        for (a, &y) in members.iter().enumerate() {
            b[(local[r[y as usize] as usize] as usize, a)] += c;
        }
    }
    // ϱ(p) is an orthogonal projection; compress it to a subspace containing its image
    let (w, c) = if s <= tol.dense_limit || expected + OVERSAMPLE >= s {
        (None, b.clone())
    } else {
        let k = expected + OVERSAMPLE;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = DMatrix::<f64>::from_fn(s, k, |_, _| StandardNormal.sample(&mut rng));
        let y = &b * omega;
        let q = y.qr().q();
        let c = q.transpose() * (&b * &q);
        (Some(q), c)
    };
    let c = (&c + c.transpose()) * 0.5;
    let (values, vectors) = sym_eigen(&c);
    let sigma_max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let reference = sigma_max.max(1.0);
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap().then(i.cmp(&j)));
    let mut keep = Vec::new();
    for &i in &idx {
        let ratio = values[i].abs() / reference;
        if ratio >= tol.guard_low && ratio <= tol.guard_high {
            return Err(Error::RankAmbiguity {
                label: label.to_string(),
                ratio,
            });
        }
        if ratio >= tol.cutoff {
            keep.push(i);
        }
    }
    if keep.len() != expected {
        return Err(Error::MultiplicityMismatch {
            got: keep.len(),
            expected,
        });
    }
    let v = DMatrix::from_fn(vectors.nrows(), keep.len(), |r, c| vectors[(r, keep[c])]);
    Ok(match w {
        Some(q) => q * v,
        None => v,
    })
}

/// The Wedderburn block of one projection.
pub fn isotypical_basis(
    p: &ExactElem,
    label: &IrrepLabel,
    dim: usize,
    reps: &[Vec<u32>],
    orbits: &OrbitDecomposition,
    tol: &RankTolerance,
    seed: u64,
) -> Result<IrrepBlock> {
    let points = orbits.points();
    let members = orbits.members();
    let mut local = vec![0u32; points];
    for m in &members {
        for (a, &x) in m.iter().enumerate() {
            local[x as usize] = a as u32;
        }
    }
    let mut pieces = Vec::new();
    for (o, m) in members.iter().enumerate() {
        let expected = exact_multiplicity(p, reps, m)?;
        if expected == 0 && m.len() > tol.dense_limit {
            // zero trace of a projection forces a zero image; nothing to store
            continue;
        }
        let img = orbit_image(p, reps, m, &local, expected, tol, seed ^ (o as u64).wrapping_mul(0x9e37_79b9), label)?;
        if img.ncols() > 0 {
            pieces.push((o, img));
        }
    }
    let multiplicity: usize = pieces.iter().map(|(_, v)| v.ncols()).sum();
    let mut u = DMatrix::<f64>::zeros(multiplicity, points);
    let mut row = 0;
    for (o, v) in pieces {
        for c in 0..v.ncols() {
            for (a, &x) in members[o].iter().enumerate() {
                u[(row, x as usize)] = v[(a, c)];
            }
            row += 1;
        }
    }
    Ok(IrrepBlock {
        label: label.clone(),
        dim,
        multiplicity,
        u,
    })
}

/// All Wedderburn blocks, with the hard check `Σ dim·m = |E|`.
pub fn wedderburn_blocks(
    sys: &ProjectionSystem,
    reps: &[Vec<u32>],
    orbits: &OrbitDecomposition,
    tol: &RankTolerance,
    seed: u64,
) -> Result<Vec<IrrepBlock>> {
    let blocks: Vec<IrrepBlock> = (0..sys.len())
        .into_par_iter()
        .map(|k| {
            isotypical_basis(
                &sys.elems[k],
                &sys.labels[k],
                sys.dims[k],
                reps,
                orbits,
                tol,
                seed.wrapping_add(k as u64),
            )
        })
        .collect::<Result<_>>()?;
    let total: usize = blocks.iter().map(|b| b.dim * b.multiplicity).sum();
    if total != orbits.points() {
        return Err(Error::MultiplicityMismatch {
            got: total,
            expected: orbits.points(),
        });
    }
    Ok(blocks)
}

/// `Θ_π(A) = dim π · U_π A U_πᵀ` for each block.
pub fn block_diagonalize(a: &DMatrix<f64>, blocks: &[IrrepBlock]) -> Vec<DMatrix<f64>> {
    blocks
        .iter()
        .map(|b| (&b.u * a * b.u.transpose()) * b.dim as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::ball;
    use crate::groups::{FreeAbelian, SAut, SpecialLinear};
    use crate::symmetry::finite::SymmetryKind;
    use crate::symmetry::orbits::orbit_decompose;
    use crate::symmetry::projections::minimal_projections;
    use rand::Rng;

    fn setup<G: GroupContext>(
        ctx: &G,
        r: usize,
        kind: SymmetryKind,
    ) -> (FiniteGroup, ProjectionSystem, Vec<Vec<u32>>, OrbitDecomposition) {
        let sigma = FiniteGroup::new(kind, ctx.symmetry_rank()).unwrap();
        let sys = minimal_projections(&sigma).unwrap();
        let e = ball(ctx, r).unwrap();
        let prep = PermRepresentation::new(ctx, &e, &sigma).unwrap();
        let orbits = orbit_decompose(e.len(), &prep.gen_perms);
        let reps = prep.expand(&sigma);
        (sigma, sys, reps, orbits)
    }

    #[test]
    fn expansion_is_a_homomorphism() {
        let g = SAut::new(3).unwrap();
        let sigma = FiniteGroup::new(SymmetryKind::Signed, 3).unwrap();
        let e = ball(&g, 2).unwrap();
        let reps = PermRepresentation::new(&g, &e, &sigma).unwrap().expand(&sigma);
        assert_eq!(reps[0], (0..e.len() as u32).collect::<Vec<_>>());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (a, b) = (rng.gen_range(0..48), rng.gen_range(0..48));
            let direct = action_on_basis(&g, &e, sigma.elem(a)).unwrap();
            assert_eq!(direct, reps[a]);
            let ab = &reps[sigma.mul(a, b)];
            for x in 0..e.len() {
                assert_eq!(ab[x], reps[a][reps[b][x] as usize]);
            }
            assert_eq!(reps[a][0], 0);
            let ai = &reps[sigma.inverse(a)];
            assert!((0..e.len()).all(|x| ai[reps[a][x] as usize] as usize == x));
        }
    }

    #[test]
    fn trivial_projection_counts_orbits() {
        let g = SpecialLinear::new(3).unwrap();
        let (_, sys, reps, orbits) = setup(&g, 2, SymmetryKind::Signed);
        let blocks = wedderburn_blocks(&sys, &reps, &orbits, &RankTolerance::default(), 1).unwrap();
        let triv = blocks
            .iter()
            .find(|b| matches!(&b.label, IrrepLabel::Wreath { i: 0, psi, .. } if psi.parts().len() == 1))
            .unwrap();
        assert_eq!(triv.multiplicity, orbits.len());
        for b in &blocks {
            let gram = &b.u * b.u.transpose();
            assert!((gram - DMatrix::identity(b.multiplicity, b.multiplicity)).amax() < 1e-10);
        }
    }

    #[test]
    fn two_point_swap() {
        // ℤ¹ with its sign flip swaps e₁ and −e₁
        let z = FreeAbelian::new(1).unwrap();
        let (_, sys, reps, orbits) = setup(&z, 1, SymmetryKind::Signed);
        let blocks = wedderburn_blocks(&sys, &reps, &orbits, &RankTolerance::default(), 0).unwrap();
        let (triv, sign) = (&blocks[0], &blocks[1]);
        assert_eq!((triv.multiplicity, sign.multiplicity), (2, 1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let row: Vec<f64> = sign.u.row(0).iter().map(|x| x * sign.u[(0, 1)].signum()).collect();
        assert!((row[0]).abs() < 1e-14 && (row[1] - h).abs() < 1e-14 && (row[2] + h).abs() < 1e-14);
    }

    #[test]
    fn trace_is_preserved_by_block_diagonalization() {
        let g = SAut::new(2).unwrap();
        let (sigma, sys, reps, orbits) = setup(&g, 2, SymmetryKind::Signed);
        let blocks = wedderburn_blocks(&sys, &reps, &orbits, &RankTolerance::default(), 5).unwrap();
        let n = orbits.points();
        let id = block_diagonalize(&DMatrix::identity(n, n), &blocks);
        for (t, b) in id.iter().zip(&blocks) {
            assert!((t - DMatrix::identity(b.multiplicity, b.multiplicity) * b.dim as f64).amax() < 1e-10);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut avg = DMatrix::<f64>::zeros(n, n);
        for r in &reps {
            for i in 0..n {
                for j in 0..n {
                    avg[(r[i] as usize, r[j] as usize)] += x[(i, j)] / sigma.order() as f64;
                }
            }
        }
        let theta = block_diagonalize(&avg, &blocks);
        let total: f64 = theta.iter().map(|t| t.trace()).sum();
        assert!((total - avg.trace()).abs() < 1e-10);
    }

    #[test]
    fn range_finder_matches_exact_trace_on_large_orbits() {
        let g = SAut::new(3).unwrap();
        let (_, sys, reps, orbits) = setup(&g, 2, SymmetryKind::Signed);
        let dense = wedderburn_blocks(&sys, &reps, &orbits, &RankTolerance::default(), 2).unwrap();
        let tol = RankTolerance {
            dense_limit: 4,
            ..RankTolerance::default()
        };
        assert!(orbits.sizes.iter().any(|&s| s > 4));
        let sketched = wedderburn_blocks(&sys, &reps, &orbits, &tol, 2).unwrap();
        let total: usize = sketched.iter().map(|b| b.dim * b.multiplicity).sum();
        assert_eq!(total, 481);
        for (a, b) in dense.iter().zip(&sketched) {
            assert_eq!(a.multiplicity, b.multiplicity);
            // same row space: the two orthogonal projectors agree
            let pa = a.u.transpose() * &a.u;
            let pb = b.u.transpose() * &b.u;
            assert!((pa - pb).amax() < 1e-9);
        }
    }
}
