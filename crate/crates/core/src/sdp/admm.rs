//! Operator splitting for `max λ` over PSD blocks × a free scalar.
//!
//! Variables are stacked as `svec(P_1), …, svec(P_k), λ` with the `√2`
//! convention, so inner products of symmetric matrices become dot products.
//! Each iteration projects onto the affine constraint set (through a cached
//! Cholesky factor of `AAᵀ`) and onto the cone (one eigendecomposition per
//! block), followed by a scaled dual update.

use std::path::PathBuf;

use log::{debug, info};
use rayon::prelude::*;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SdpProblem;
use crate::linalg::sym_eigen;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Interior point while the Schur complement is small, otherwise ADMM.
    #[default]
    Auto,
    Admm,
    InteriorPoint,
}

/// Largest constraint count for which `Auto` picks the interior point method.
pub const IPM_MAX_CONSTRAINTS: usize = 2500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Target for the relative primal, dual and gap residuals.
    pub accuracy: f64,
    pub max_iters: usize,
    /// Initial penalty ρ.
    pub rho: f64,
    /// Over-relaxation α ∈ (0, 2).
    pub alpha: f64,
    /// Rebalance ρ every this many iterations (0 disables).
    pub adapt_every: usize,
    /// Normalize constraint rows before factoring.
    pub scale_rows: bool,
    /// Write the iterate every this many iterations (0 disables).
    pub checkpoint_every: usize,
    pub checkpoint: Option<PathBuf>,
    /// Pivots below this fraction of the largest are treated as dependent rows.
    pub rank_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            accuracy: 1e-9,
            max_iters: 200_000,
            rho: 1.0,
            alpha: 1.6,
            adapt_every: 50,
            scale_rows: true,
            checkpoint_every: 0,
            checkpoint: None,
            rank_tol: 1e-11,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    IterationLimit,
    /// Stopped early without further progress; the best iterate is returned.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub lambda: f64,
    pub blocks: Vec<DMatrix<f64>>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    /// Largest constraint violation of the returned (PSD) blocks.
    pub max_violation: f64,
}

struct Checkpoint {
    iteration: usize,
    rho: f64,
    z: Vec<f64>,
    u: Vec<f64>,
}

impl Checkpoint {
    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.z.len());
        out.extend((self.iteration as u64).to_le_bytes());
        out.extend(self.rho.to_le_bytes());
        out.extend((self.z.len() as u64).to_le_bytes());
        for v in self.z.iter().chain(&self.u) {
            out.extend(v.to_le_bytes());
        }
        out
    }

    fn from_bytes(b: &[u8]) -> Option<Self> {
        let word = |k: usize| b.get(8 * k..8 * k + 8).map(|s| <[u8; 8]>::try_from(s).unwrap());
        let iteration = u64::from_le_bytes(word(0)?) as usize;
        let rho = f64::from_le_bytes(word(1)?);
        let n = u64::from_le_bytes(word(2)?) as usize;
        if b.len() != 8 * (3 + 2 * n) {
            return None;
        }
        let vals: Vec<f64> = (0..2 * n).map(|k| f64::from_le_bytes(word(3 + k).unwrap())).collect();
        Some(Self {
            iteration,
            rho,
            z: vals[..n].to_vec(),
            u: vals[n..].to_vec(),
        })
    }
}

struct Layout {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    n: usize,
}

impl Layout {
    fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut n = 0;
        for &m in sizes {
            offsets.push(n);
            n += m * (m + 1) / 2;
        }
        Self {
            offsets,
            sizes: sizes.to_vec(),
            n: n + 1,
        }
    }

    fn lambda(&self) -> usize {
        self.n - 1
    }

    /// Column-wise upper-triangle position of `(i, j)`, `i ≤ j`.
    fn index(&self, b: usize, i: usize, j: usize) -> usize {
        self.offsets[b] + j * (j + 1) / 2 + i
    }

    fn unpack(&self, x: &[f64], b: usize) -> DMatrix<f64> {
        let m = self.sizes[b];
        let mut out = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let v = x[self.index(b, i, j)];
                if i == j {
                    out[(i, i)] = v;
                } else {
                    out[(i, j)] = v / std::f64::consts::SQRT_2;
                    out[(j, i)] = out[(i, j)];
                }
            }
        }
        out
    }

    fn pack(&self, p: &DMatrix<f64>, b: usize, x: &mut [f64]) {
        let m = self.sizes[b];
        for j in 0..m {
            for i in 0..=j {
                x[self.index(b, i, j)] = if i == j {
                    p[(i, i)]
                } else {
                    std::f64::consts::SQRT_2 * 0.5 * (p[(i, j)] + p[(j, i)])
                };
            }
        }
    }
}

/// Row-sparse constraint matrix with a factored Gram matrix on independent rows.
struct Affine {
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    /// Independent rows, in pivot order.
    active: Vec<usize>,
    /// Lower Cholesky factor of `A_act A_actᵀ`.
    l: DMatrix<f64>,
}

impl Affine {
    fn new(p: &SdpProblem, layout: &Layout, cfg: &SolverConfig) -> Result<Self> {
        let mut rows = Vec::with_capacity(p.constraints.len());
        let mut b = Vec::with_capacity(p.constraints.len());
        for c in &p.constraints {
            let mut row: Vec<(usize, f64)> = c
                .entries
                .iter()
                .map(|&(blk, i, j, v)| {
                    let w = if i == j { v } else { std::f64::consts::SQRT_2 * v };
                    (layout.index(blk as usize, i as usize, j as usize), w)
                })
                .collect();
            if c.lambda_coeff != 0.0 {
                row.push((layout.lambda(), c.lambda_coeff));
            }
            row.sort_by_key(|e| e.0);
            let mut rhs = c.rhs;
            if cfg.scale_rows {
                let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|e| e.1 /= norm);
                    rhs /= norm;
                }
            }
            rows.push(row);
            b.push(rhs);
        }
        let (active, l) = pivoted_gram_cholesky(&rows, layout.n, cfg.rank_tol);
        // a dropped row must be implied by the kept ones
        let me = Self { rows, b, active, l };
        if me.active.len() < me.rows.len() {
            let mut x = vec![0.0; layout.n];
            me.project(&mut x);
            let worst = (0..me.rows.len())
                .map(|r| (me.dot(r, &x) - me.b[r]).abs())
                .fold(0.0, f64::max);
            debug!(
                "dropped {} dependent constraints; inconsistency {worst:e}",
                me.rows.len() - me.active.len()
            );
            if worst > 1e-6 * (1.0 + me.b.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                return Err(Error::Diverged(format!(
                    "constraints are inconsistent (residual {worst:e})"
                )));
            }
        }
        Ok(me)
    }

    fn dot(&self, r: usize, x: &[f64]) -> f64 {
        self.rows[r].iter().map(|&(k, v)| v * x[k]).sum()
    }

    /// In place `x ← x − A_actᵀ (A_act A_actᵀ)⁻¹ (A_act x − b)`; returns the multiplier.
    fn project(&self, x: &mut [f64]) -> Vec<f64> {
        let r = self.active.len();
        let mut w: Vec<f64> = self.active.iter().map(|&k| self.dot(k, x) - self.b[k]).collect();
        for i in 0..r {
            let mut s = w[i];
            for j in 0..i {
                s -= self.l[(i, j)] * w[j];
            }
            w[i] = s / self.l[(i, i)];
        }
        for i in (0..r).rev() {
            let mut s = w[i];
            for j in i + 1..r {
                s -= self.l[(j, i)] * w[j];
            }
            w[i] = s / self.l[(i, i)];
        }
        for (i, &k) in self.active.iter().enumerate() {
            for &(c, v) in &self.rows[k] {
                x[c] -= v * w[i];
            }
        }
        w
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Diagonally pivoted Cholesky of the Gram matrix of `rows`, stopping at numerical rank.
fn pivoted_gram_cholesky(rows: &[Vec<(usize, f64)>], _n: usize, tol: f64) -> (Vec<usize>, DMatrix<f64>) {
    let m = rows.len();
    let mut g = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = sparse_dot(&rows[i], &rows[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let mut perm: Vec<usize> = (0..m).collect();
    let mut diag: Vec<f64> = (0..m).map(|i| g[(i, i)]).collect();
    let max_diag = diag.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut l = DMatrix::<f64>::zeros(m, m);
    let mut rank = 0;
    for k in 0..m {
        let (best, &d) = diag[k..]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, d)| (i + k, d))
            .unwrap();
        if d <= tol * max_diag || d <= 0.0 {
            break;
        }
        perm.swap(k, best);
        diag.swap(k, best);
        l.swap_rows(k, best);
        let lkk = d.sqrt();
        l[(k, k)] = lkk;
        for i in k + 1..m {
            let mut s = g[(perm[i], perm[k])];
            for j in 0..k {
                s -= l[(i, j)] * l[(k, j)];
            }
            l[(i, k)] = s / lkk;
            diag[i] -= l[(i, k)] * l[(i, k)];
        }
        rank += 1;
    }
    let active = perm[..rank].to_vec();
    let l = l.view((0, 0), (rank, rank)).into_owned();
    (active, l)
}

fn project_cone(x: &mut [f64], layout: &Layout) {
    let clamped: Vec<Option<DMatrix<f64>>> = (0..layout.sizes.len())
        .into_par_iter()
        .map(|b| {
            let p = layout.unpack(x, b);
            let (w, v) = sym_eigen(&p);
            if w.iter().all(|&e| e >= 0.0) {
                return None;
            }
            Some(&v * DMatrix::from_diagonal(&w.map(|e| e.max(0.0))) * v.transpose())
        })
        .collect();
    for (b, c) in clamped.into_iter().enumerate() {
        if let Some(c) = c {
            layout.pack(&c, b, x);
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Constraints kept after dropping numerically dependent rows, ascending.
pub(super) fn independent_rows(p: &SdpProblem, cfg: &SolverConfig) -> Result<Vec<usize>> {
    let layout = Layout::new(&p.block_sizes);
    let mut keep = Affine::new(p, &layout, cfg)?.active;
    keep.sort_unstable();
    Ok(keep)
}

pub fn solve(p: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    if !(cfg.accuracy > 0.0) {
        return Err(Error::Config("solver accuracy must be positive".into()));
    }
    let ipm = match cfg.method {
        SolverMethod::Auto => p.constraint_count() <= IPM_MAX_CONSTRAINTS,
        SolverMethod::Admm => false,
        SolverMethod::InteriorPoint => true,
    };
    if ipm {
        super::ipm::solve_ipm(p, cfg)
    } else {
        solve_admm(p, cfg)
    }
}

fn solve_admm(p: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    let layout = Layout::new(&p.block_sizes);
    let n = layout.n;
    let aff = Affine::new(p, &layout, cfg)?;
    let lam = layout.lambda();
    let mut z = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut rho = cfg.rho;
    let mut start = 0;
    if let Some(path) = cfg.checkpoint.as_ref().filter(|p| p.exists()) {
        let ck = Checkpoint::from_bytes(&std::fs::read(path)?).ok_or_else(|| Error::Artifact {
            path: path.clone(),
            msg: "unreadable solver checkpoint".into(),
        })?;
        if ck.z.len() == n {
            info!("resuming from checkpoint at iteration {}", ck.iteration);
            start = ck.iteration;
            rho = ck.rho;
            z = ck.z;
            u = ck.u;
        }
    }
    let mut x = vec![0.0; n];
    let mut w = Vec::new();
    let (mut r_prim, mut r_dual, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut status = SolveStatus::IterationLimit;
    let mut it = start;
    while it < cfg.max_iters {
        it += 1;
        for k in 0..n {
            x[k] = z[k] - u[k];
        }
        // c = −e_λ
        x[lam] += 1.0 / rho;
        w = aff.project(&mut x);
        let z_old = z.clone();
        for k in 0..n {
            let xh = cfg.alpha * x[k] + (1.0 - cfg.alpha) * z_old[k];
            z[k] = xh + u[k];
        }
        project_cone(&mut z, &layout);
        for k in 0..n {
            let xh = cfg.alpha * x[k] + (1.0 - cfg.alpha) * z_old[k];
            u[k] += xh - z[k];
        }
        let diff: Vec<f64> = (0..n).map(|k| x[k] - z[k]).collect();
        let step: Vec<f64> = (0..n).map(|k| z[k] - z_old[k]).collect();
        r_prim = norm(&diff) / (1.0 + norm(&x).max(norm(&z)));
        r_dual = rho * norm(&step) / (1.0 + rho * norm(&u));
        // affine multiplier y = ρw gives the dual objective −bᵀy
        let primal_obj = -x[lam];
        let dual_obj = -rho
            * aff
                .active
                .iter()
                .zip(&w)
                .map(|(&k, wi)| aff.b[k] * wi)
                .sum::<f64>();
        gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs() + dual_obj.abs());
        if !(r_prim.is_finite() && r_dual.is_finite()) || norm(&z) > 1e15 {
            return Err(Error::Diverged(format!("iterate blew up at iteration {it}")));
        }
        if r_prim <= cfg.accuracy && r_dual <= cfg.accuracy && gap <= cfg.accuracy {
            status = SolveStatus::Converged;
            break;
        }
        if cfg.adapt_every > 0 && it % cfg.adapt_every == 0 {
            let ratio = r_prim / r_dual.max(f64::MIN_POSITIVE);
            let factor = if ratio > 10.0 {
                2.0
            } else if ratio < 0.1 {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 && (1e-6..=1e6).contains(&(rho * factor)) {
                rho *= factor;
                u.iter_mut().for_each(|v| *v /= factor);
            }
        }
        if it % 1000 == 0 {
            debug!("it {it}: λ={:.10} prim {r_prim:.2e} dual {r_dual:.2e} gap {gap:.2e} ρ={rho:.2e}", z[lam]);
        }
        if let (Some(path), true) = (&cfg.checkpoint, cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0) {
            let ck = Checkpoint {
                iteration: it,
                rho,
                z: z.clone(),
                u: u.clone(),
            };
            std::fs::write(path, ck.to_bytes())?;
        }
    }
    let _ = w;
    let blocks: Vec<DMatrix<f64>> = (0..layout.sizes.len()).map(|b| layout.unpack(&z, b)).collect();
    let lambda = z[lam];
    let max_violation = p.max_residual(&blocks, lambda);
    info!(
        "solver {:?} after {it} iterations: λ = {lambda}, prim {r_prim:.2e}, dual {r_dual:.2e}, gap {gap:.2e}",
        status
    );
    Ok(SdpSolution {
        lambda,
        blocks,
        status,
        iterations: it,
        primal_residual: r_prim,
        dual_residual: r_dual,
        gap,
        max_violation,
    })
}
