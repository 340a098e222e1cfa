//! The semidefinite programs of the pipeline.
//!
//! Both problems maximize λ subject to `Σ_b ⟨A_b, P_b⟩ + d·λ = rhs` for
//! every constraint, with each `P_b` positive semidefinite. Symmetric
//! constraint matrices are stored by their upper triangle; an off-diagonal
//! entry `a_ij` stands for both `(i, j)` and `(j, i)`, as in SDPA files.

mod admm;
mod ipm;
mod sdpa;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use admm::{solve, SdpSolution, SolveStatus, SolverConfig, SolverMethod, IPM_MAX_CONSTRAINTS};
pub use sdpa::{read_sdpa, write_sdpa, parse_sdpa, format_sdpa};

use crate::groupring::{laplacian, twisted_mul, DivisionTable};
use crate::symmetry::{IrrepBlock, OrbitDecomposition};
use crate::{Error, Result};

/// Entries below this magnitude are dropped from symmetrized constraints.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// `(block, i, j, a_ij)` with `i ≤ j`.
    pub entries: Vec<(u32, u32, u32, f64)>,
    pub lambda_coeff: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub block_sizes: Vec<usize>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    /// Matrix entries of all PSD blocks, `Σ mᵦ²`.
    pub fn variable_count(&self) -> usize {
        self.block_sizes.iter().map(|m| m * m).sum()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// `Σ_b ⟨A_b, P_b⟩ + d·λ − rhs` for one constraint.
    pub fn residual(&self, c: usize, blocks: &[DMatrix<f64>], lambda: f64) -> f64 {
        let con = &self.constraints[c];
        let mut acc = con.lambda_coeff * lambda - con.rhs;
        for &(b, i, j, v) in &con.entries {
            let p = blocks[b as usize][(i as usize, j as usize)];
            acc += if i == j { v * p } else { 2.0 * v * p };
        }
        acc
    }

    pub fn max_residual(&self, blocks: &[DMatrix<f64>], lambda: f64) -> f64 {
        (0..self.constraints.len())
            .map(|c| self.residual(c, blocks, lambda).abs())
            .fold(0.0, f64::max)
    }
}

/// `(constraints, variables)` of the plain problem on `|E|`, `|E⁻¹E|`.
pub fn op_dimensions(e_len: usize, e2_len: usize) -> (usize, usize) {
    (e2_len, e_len * e_len)
}

/// The plain problem: one `|E|×|E|` block, one constraint per `t ∈ E⁻¹E`.
///
/// `delta` and `delta_sq` are `Δ` and `Δ²` over E⁻¹E.
pub fn build_op(delta: &[f64], delta_sq: &[f64], m: &DivisionTable) -> SdpProblem {
    let n = m.size();
    let t_len = m.target_len();
    assert_eq!(delta.len(), t_len);
    assert_eq!(delta_sq.len(), t_len);
    let mut constraints: Vec<Constraint> = (0..t_len)
        .map(|t| Constraint {
            entries: Vec::new(),
            lambda_coeff: delta[t],
            rhs: delta_sq[t],
        })
        .collect();
    for x in 0..n {
        for y in x..n {
            let (a, b) = (m.get(x, y), m.get(y, x));
            if x == y {
                constraints[a].entries.push((0, x as u32, y as u32, 1.0));
            } else if a == b {
                constraints[a].entries.push((0, x as u32, y as u32, 1.0));
            } else {
                constraints[a].entries.push((0, x as u32, y as u32, 0.5));
                constraints[b].entries.push((0, x as u32, y as u32, 0.5));
            }
        }
    }
    for c in &mut constraints {
        c.entries.sort_by_key(|&(b, i, j, _)| (b, i, j));
    }
    SdpProblem {
        block_sizes: vec![n],
        constraints,
    }
}

/// `Δ` and `Δ²` over E⁻¹E, from the division table of the unit ball.
///
/// Products are taken in checked integers, so `Δ²` is exact.
pub fn laplacian_coefficients(s: usize, b1: &DivisionTable) -> (Vec<f64>, Vec<f64>) {
    let d = laplacian::<i64>(b1.size(), s);
    let sq = twisted_mul(&d, &d, b1);
    let delta = d.extend_to(b1.target_len());
    (
        delta.coeffs().iter().map(|&c| c as f64).collect(),
        sq.coeffs().iter().map(|&c| c as f64).collect(),
    )
}

/// Checks that a coefficient vector over E⁻¹E is constant on Σ-orbits.
pub fn check_orbit_constant(values: &[f64], orbits: &OrbitDecomposition) -> Result<()> {
    for (x, &o) in orbits.orbit_of.iter().enumerate() {
        if values[x] != values[orbits.reps[o as usize] as usize] {
            return Err(Error::NotOrbitConstant { orbit: o as usize });
        }
    }
    Ok(())
}

/// The symmetrized problem: blocks of sizes `m_π`, one constraint per orbit.
///
/// Constraint `[t]` is `Σ_π ⟨Θ_π(δ_[t]), P_π⟩ + Δ_t λ = (Δ²)_t`. Blocks with
/// `m_π = 0` are skipped; `kept` maps problem blocks back to `blocks`.
pub fn build_sop(
    delta: &[f64],
    delta_sq: &[f64],
    orbits: &OrbitDecomposition,
    blocks: &[IrrepBlock],
    m: &DivisionTable,
) -> Result<(SdpProblem, Vec<usize>)> {
    check_orbit_constant(delta, orbits)?;
    check_orbit_constant(delta_sq, orbits)?;
    let n = m.size();
    let kept: Vec<usize> = (0..blocks.len()).filter(|&k| blocks[k].multiplicity > 0).collect();
    let norbits = orbits.len();
    let mut constraints = Vec::with_capacity(norbits);
    // pairs (x, y) grouped by the orbit of x⁻¹y
    let mut pairs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); norbits];
    for x in 0..n {
        for (y, &t) in m.row(x).iter().enumerate() {
            pairs[orbits.orbit_of[t as usize] as usize].push((x as u32, y as u32));
        }
    }
    for (o, list) in pairs.iter().enumerate() {
        let rep = orbits.reps[o] as usize;
        let mut entries = Vec::new();
        if !list.is_empty() {
            let weight = 1.0 / orbits.sizes[o] as f64;
            for (pb, &k) in kept.iter().enumerate() {
                let u = &blocks[k].u;
                let mb = u.nrows();
                let mut theta = DMatrix::<f64>::zeros(mb, mb);
                for &(x, y) in list {
                    let (cx, cy) = (u.column(x as usize), u.column(y as usize));
                    theta.ger(1.0, &cx, &cy, 1.0);
                }
                let scale = blocks[k].dim as f64 * weight;
                for i in 0..mb {
                    for j in i..mb {
                        let v = 0.5 * (theta[(i, j)] + theta[(j, i)]) * scale;
                        if v.abs() >= DROP_TOL {
                            entries.push((pb as u32, i as u32, j as u32, v));
                        }
                    }
                }
            }
        }
        constraints.push(Constraint {
            entries,
            lambda_coeff: delta[rep],
            rhs: delta_sq[rep],
        });
    }
    Ok((
        SdpProblem {
            block_sizes: kept.iter().map(|&k| blocks[k].multiplicity).collect(),
            constraints,
        },
        kept,
    ))
}

/// Restriction of a problem to the face `{P_b : P_b k_b = 0}`.
///
/// Every feasible `P` pairs to zero with `J = 𝟙𝟙ᵀ` (the augmentation of
/// `Δ² − λΔ` vanishes), so `P·𝟙 = 0`; in block coordinates the kernel
/// vectors are `U_π 𝟙`. Solving on the face removes that degeneracy.
#[derive(Clone, Debug)]
pub struct Face {
    /// `m_b × m'_b` orthonormal bases with `P_b = V_b P'_b V_bᵀ`.
    pub bases: Vec<DMatrix<f64>>,
}

/// `U_π 𝟙` for each kept block (`𝟙` itself for the plain problem).
pub fn augmentation_kernels(blocks: &[IrrepBlock], kept: &[usize]) -> Vec<Vec<f64>> {
    kept.iter()
        .map(|&k| blocks[k].u.row_iter().map(|r| r.sum()).collect())
        .collect()
}

impl Face {
    /// Relative norms below `1e-10` count as zero kernel vectors.
    pub fn new(block_sizes: &[usize], kernels: &[Vec<f64>]) -> Self {
        let bases = block_sizes
            .iter()
            .zip(kernels)
            .map(|(&m, k)| {
                let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                if m == 0 || norm <= 1e-10 * (m as f64).sqrt() {
                    return DMatrix::identity(m, m);
                }
                let mut a = DMatrix::<f64>::identity(m, m);
                a.set_column(0, &nalgebra::DVector::from_iterator(m, k.iter().map(|v| v / norm)));
                // Gram-Schmidt of [k, e_1, …] minus k, keeping the m − 1 best-conditioned columns
                let q = a.qr().q();
                q.columns(1, m - 1).into_owned()
            })
            .collect();
        Self { bases }
    }

    pub fn reduce(&self, p: &SdpProblem) -> SdpProblem {
        let constraints = p
            .constraints
            .iter()
            .map(|c| {
                let mut entries = Vec::new();
                let mut k = 0;
                for (b, v) in self.bases.iter().enumerate() {
                    let m = v.nrows();
                    let mut a = DMatrix::<f64>::zeros(m, m);
                    let mut any = false;
                    while k < c.entries.len() && c.entries[k].0 as usize == b {
                        let (_, i, j, x) = c.entries[k];
                        a[(i as usize, j as usize)] += x;
                        if i != j {
                            a[(j as usize, i as usize)] += x;
                        }
                        any = true;
                        k += 1;
                    }
                    if !any {
                        continue;
                    }
                    let r = v.transpose() * a * v;
                    for j in 0..r.ncols() {
                        for i in 0..=j {
                            let x = 0.5 * (r[(i, j)] + r[(j, i)]);
                            if x.abs() >= DROP_TOL {
                                entries.push((b as u32, i as u32, j as u32, x));
                            }
                        }
                    }
                }
                Constraint {
                    entries,
                    lambda_coeff: c.lambda_coeff,
                    rhs: c.rhs,
                }
            })
            .collect();
        SdpProblem {
            block_sizes: self.bases.iter().map(|v| v.ncols()).collect(),
            constraints,
        }
    }

    pub fn lift(&self, reduced: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        self.bases
            .iter()
            .zip(reduced)
            .map(|(v, p)| {
                let full = v * p * v.transpose();
                (&full + full.transpose()) * 0.5
            })
            .collect()
    }
}

/// Solves on the augmentation face and lifts the blocks back.
pub fn solve_on_face(p: &SdpProblem, kernels: &[Vec<f64>], cfg: &SolverConfig) -> Result<SdpSolution> {
    let face = Face::new(&p.block_sizes, kernels);
    let mut sol = solve(&face.reduce(p), cfg)?;
    sol.blocks = face.lift(&sol.blocks);
    sol.max_violation = p.max_residual(&sol.blocks, sol.lambda);
    Ok(sol)
}

/// `P = (1/|Σ|) Σ_σ Σ_π dim π · σ(U_πᵀ P_π U_π)`.
///
/// `reps` holds `ϱ_E(σ)` for every σ; `solution[k]` belongs to `blocks[kept[k]]`.
pub fn reconstruct(
    solution: &[DMatrix<f64>],
    blocks: &[IrrepBlock],
    kept: &[usize],
    reps: &[Vec<u32>],
) -> DMatrix<f64> {
    let n = reps[0].len();
    let mut x = DMatrix::<f64>::zeros(n, n);
    for (p, &k) in solution.iter().zip(kept) {
        let u = &blocks[k].u;
        x += (u.transpose() * p * u) * blocks[k].dim as f64;
    }
    let mut out = DMatrix::<f64>::zeros(n, n);
    let w = 1.0 / reps.len() as f64;
    for r in reps {
        for j in 0..n {
            let rj = r[j] as usize;
            for i in 0..n {
                out[(r[i] as usize, rj)] += w * x[(i, j)];
            }
        }
    }
    (&out + out.transpose()) * 0.5
}

/// `⟨δ_t, P⟩ = Σ_{M[x,y]=t} P[x,y]` for every `t`.
pub fn delta_pairings(p: &DMatrix<f64>, m: &DivisionTable) -> Vec<f64> {
    let mut out = vec![0.0; m.target_len()];
    for x in 0..m.size() {
        for (y, &t) in m.row(x).iter().enumerate() {
            out[t as usize] += p[(x, y)];
        }
    }
    out
}

#[cfg(test)]
mod tests;
