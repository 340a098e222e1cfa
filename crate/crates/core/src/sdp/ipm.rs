//! Infeasible primal-dual path following (HKM direction, Mehrotra corrector).
//!
//! Primal: `max λ` s.t. `A(P) + dλ = b`, `P ⪰ 0`.
//! Dual: `min bᵀy` s.t. `Z = A*(y) ⪰ 0`, `dᵀy = 1`.
//! Each iteration forms the dense Schur complement `M_st = ⟨A_s, P A_t Z⁻¹⟩`,
//! so this is meant for problems with at most a few thousand constraints.

use log::{debug, info};
use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use super::admm::{independent_rows, SdpSolution, SolveStatus, SolverConfig};
use super::SdpProblem;
use crate::linalg::sym_eigen;
use crate::{Error, Result};

const STEP: f64 = 0.95;
/// Stop after this many iterations without a better merit value.
const STALL: usize = 5;

struct Data {
    sizes: Vec<usize>,
    /// Per constraint, per block: `(i, j, a_ij)` with `i ≤ j`.
    rows: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    d: Vec<f64>,
    b: Vec<f64>,
    /// Constraints touching each block.
    touching: Vec<Vec<usize>>,
}

impl Data {
    fn new(p: &SdpProblem, keep: &[usize]) -> Self {
        let mut rows = Vec::with_capacity(keep.len());
        let mut touching = vec![Vec::new(); p.block_sizes.len()];
        for (r, &k) in keep.iter().enumerate() {
            let c = &p.constraints[k];
            let mut per: Vec<(usize, Vec<(usize, usize, f64)>)> = Vec::new();
            for &(bl, i, j, v) in &c.entries {
                let bl = bl as usize;
                if per.last().map(|e| e.0) != Some(bl) {
                    per.push((bl, Vec::new()));
                    touching[bl].push(r);
                }
                per.last_mut().unwrap().1.push((i as usize, j as usize, v));
            }
            rows.push(per);
        }
        Self {
            sizes: p.block_sizes.clone(),
            rows,
            d: keep.iter().map(|&k| p.constraints[k].lambda_coeff).collect(),
            b: keep.iter().map(|&k| p.constraints[k].rhs).collect(),
            touching,
        }
    }

    fn apply(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|per| {
                per.iter()
                    .map(|(bl, es)| {
                        es.iter()
                            .map(|&(i, j, v)| if i == j { v * x[*bl][(i, i)] } else { v * (x[*bl][(i, j)] + x[*bl][(j, i)]) })
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.sizes.iter().map(|&m| DMatrix::zeros(m, m)).collect();
        for (per, &yt) in self.rows.iter().zip(y) {
            for (bl, es) in per {
                for &(i, j, v) in es {
                    out[*bl][(i, j)] += yt * v;
                    if i != j {
                        out[*bl][(j, i)] += yt * v;
                    }
                }
            }
        }
        out
    }

    /// `M_st = Σ_b ⟨A_s, P A_t Z⁻¹⟩`.
    fn schur(&self, p: &[DMatrix<f64>], zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let k = self.rows.len();
        let cols: Vec<Vec<f64>> = (0..k)
            .into_par_iter()
            .map(|t| {
                let mut col = vec![0.0; k];
                for (bl, es) in &self.rows[t] {
                    let (pb, zb) = (&p[*bl], &zinv[*bl]);
                    let m = pb.nrows();
                    let mut g = DMatrix::<f64>::zeros(m, m);
                    for &(i, j, v) in es {
                        g.ger(v, &pb.column(i), &zb.column(j), 1.0);
                        if i != j {
                            g.ger(v, &pb.column(j), &zb.column(i), 1.0);
                        }
                    }
                    for &s in &self.touching[*bl] {
                        let es_s = &self.rows[s].iter().find(|e| e.0 == *bl).unwrap().1;
                        let mut acc = 0.0;
                        for &(i, j, v) in es_s {
                            acc += if i == j { v * g[(i, i)] } else { v * (g[(i, j)] + g[(j, i)]) };
                        }
                        col[s] += acc;
                    }
                }
                col
            })
            .collect();
        let mut out = DMatrix::from_fn(k, k, |s, t| cols[t][s]);
        out = (&out + out.transpose()) * 0.5;
        out
    }
}

fn sym(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

fn dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `α ≤ 1` keeping `X + α·ΔX ⪰ 0`, for `X ≻ 0`.
fn max_step(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> f64 {
    let mut alpha = 1.0f64;
    for (xb, db) in x.iter().zip(dx) {
        if xb.nrows() == 0 {
            continue;
        }
        let Some(ch) = Cholesky::new(xb.clone()) else {
            return 0.0;
        };
        let l = ch.l();
        let li_d = l.solve_lower_triangular(db).unwrap();
        let s = l.solve_lower_triangular(&li_d.transpose()).unwrap();
        let (w, _) = sym_eigen(&sym(s));
        let min = w.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            alpha = alpha.min(-1.0 / min);
        }
    }
    alpha
}

/// Cholesky of `M`, retrying with growing diagonal shifts once `M` is
/// numerically singular near the end of the path.
fn factor_regularized(m: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let maxd = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let mut shift = 1e-14 * maxd.max(f64::MIN_POSITIVE);
    for _ in 0..6 {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(r) {
            return Some(c);
        }
        shift *= 100.0;
    }
    None
}

struct Direction {
    dy: Vec<f64>,
    dlambda: f64,
    dz: Vec<DMatrix<f64>>,
    dp: Vec<DMatrix<f64>>,
}

struct Iterate<'a> {
    data: &'a Data,
    p: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    zinv: Vec<DMatrix<f64>>,
    y: Vec<f64>,
    lambda: f64,
}

impl Iterate<'_> {
    /// Solves the Newton system for the complementarity target `rc` (one
    /// matrix per block, standing for `σμI − PZ − …`).
    fn direction(
        &self,
        chol: &Cholesky<f64, nalgebra::Dyn>,
        rp: &[f64],
        rd: &[DMatrix<f64>],
        rl: f64,
        rc: &[DMatrix<f64>],
    ) -> Direction {
        let d = self.data;
        let base: Vec<DMatrix<f64>> = (0..d.sizes.len())
            .map(|b| sym((&rc[b] - &self.p[b] * &rd[b]) * &self.zinv[b]))
            .collect();
        let ab = d.apply(&base);
        let h = DVector::from_iterator(ab.len(), ab.iter().zip(rp).map(|(a, r)| a - r));
        let dv = DVector::from_column_slice(&d.d);
        let mh = chol.solve(&h);
        let md = chol.solve(&dv);
        let dlambda = (rl - dv.dot(&mh)) / dv.dot(&md);
        let dy: Vec<f64> = (&mh + &md * dlambda).iter().copied().collect();
        let mut dz = d.adjoint(&dy);
        for (z, r) in dz.iter_mut().zip(rd) {
            *z += r;
        }
        let dp: Vec<DMatrix<f64>> = (0..d.sizes.len())
            .map(|b| sym((&rc[b] - &self.p[b] * &dz[b]) * &self.zinv[b]))
            .collect();
        Direction {
            dy,
            dlambda,
            dz,
            dp,
        }
    }
}

pub(super) fn solve_ipm(problem: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    let keep = independent_rows(problem, cfg)?;
    let data = Data::new(problem, &keep);
    let n: usize = data.sizes.iter().sum();
    let scale = 1.0 + data.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eye = |m: usize, s: f64| DMatrix::<f64>::identity(m, m) * s;
    let mut it = Iterate {
        data: &data,
        p: data.sizes.iter().map(|&m| eye(m, scale)).collect(),
        z: data.sizes.iter().map(|&m| eye(m, 1.0)).collect(),
        zinv: data.sizes.iter().map(|&m| eye(m, 1.0)).collect(),
        y: vec![0.0; data.b.len()],
        lambda: 0.0,
    };
    let bnorm = vnorm(&data.b);
    let mut status = SolveStatus::IterationLimit;
    let (mut pinf, mut dinf, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut iters = 0;
    let max_iters = cfg.max_iters.min(500);
    // (merit, iteration, P, λ, residuals) of the best iterate so far
    let mut best: Option<(f64, usize, Vec<DMatrix<f64>>, f64, [f64; 3])> = None;
    while iters < max_iters {
        let ap = data.apply(&it.p);
        let rp: Vec<f64> = (0..ap.len()).map(|t| data.b[t] - ap[t] - data.d[t] * it.lambda).collect();
        let aty = data.adjoint(&it.y);
        let rd: Vec<DMatrix<f64>> = (0..data.sizes.len()).map(|b| &aty[b] - &it.z[b]).collect();
        let rl = 1.0 - data.d.iter().zip(&it.y).map(|(a, b)| a * b).sum::<f64>();
        let dual_obj: f64 = data.b.iter().zip(&it.y).map(|(a, b)| a * b).sum();
        let mu = dot(&it.p, &it.z) / n.max(1) as f64;
        pinf = vnorm(&rp) / (1.0 + bnorm);
        dinf = (fro(&rd) + rl.abs()) / (1.0 + fro(&it.z));
        gap = (dual_obj - it.lambda).abs() / (1.0 + it.lambda.abs() + dual_obj.abs());
        debug!("ipm {iters}: λ={:.12} pinf {pinf:.1e} dinf {dinf:.1e} gap {gap:.1e} μ {mu:.1e}", it.lambda);
        let merit = pinf.max(dinf).max(gap);
        if best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, iters, it.p.clone(), it.lambda, [pinf, dinf, gap]));
        }
        if pinf <= cfg.accuracy && dinf <= cfg.accuracy && gap <= cfg.accuracy {
            status = SolveStatus::Converged;
            break;
        }
        if best.as_ref().is_some_and(|b| iters >= b.1 + STALL) {
            debug!("no progress for {STALL} iterations; stopping");
            status = SolveStatus::Stalled;
            break;
        }
        iters += 1;
        let m = data.schur(&it.p, &it.zinv);
        let Some(chol) = factor_regularized(m) else {
            debug!("Schur complement lost definiteness; stopping");
            status = SolveStatus::Stalled;
            break;
        };
        let pz: Vec<DMatrix<f64>> = (0..data.sizes.len()).map(|b| -(&it.p[b] * &it.z[b])).collect();
        let pred = it.direction(&chol, &rp, &rd, rl, &pz);
        let ap_ = max_step(&it.p, &pred.dp);
        let ad_ = max_step(&it.z, &pred.dz);
        let after: f64 = (0..data.sizes.len())
            .map(|b| (&it.p[b] + &pred.dp[b] * ap_).dot(&(&it.z[b] + &pred.dz[b] * ad_)))
            .sum();
        let sigma = (after / (mu * n as f64)).clamp(0.0, 1.0).powi(3);
        let rc: Vec<DMatrix<f64>> = (0..data.sizes.len())
            .map(|b| eye(data.sizes[b], sigma * mu) + &pz[b] - &pred.dp[b] * &pred.dz[b])
            .collect();
        let dir = it.direction(&chol, &rp, &rd, rl, &rc);
        let alpha_p = (STEP * max_step(&it.p, &dir.dp)).min(1.0);
        let alpha_d = (STEP * max_step(&it.z, &dir.dz)).min(1.0);
        if !(dir.dlambda.is_finite() && alpha_p.is_finite() && alpha_d.is_finite()) {
            return Err(Error::Diverged(format!("non-finite step at iteration {iters}")));
        }
        if alpha_p < 1e-12 && alpha_d < 1e-12 {
            debug!("step length collapsed; stopping");
            status = SolveStatus::Stalled;
            break;
        }
        let next_z: Vec<DMatrix<f64>> = (0..data.sizes.len()).map(|b| &it.z[b] + &dir.dz[b] * alpha_d).collect();
        let Some(zinv) = next_z
            .iter()
            .map(|z| Cholesky::new(z.clone()).map(|c| sym(c.inverse())))
            .collect::<Option<Vec<_>>>()
        else {
            status = SolveStatus::Stalled;
            break;
        };
        for b in 0..data.sizes.len() {
            it.p[b] = sym(&it.p[b] + &dir.dp[b] * alpha_p);
        }
        it.lambda += alpha_p * dir.dlambda;
        it.z = next_z;
        it.zinv = zinv;
        for (y, dy) in it.y.iter_mut().zip(&dir.dy) {
            *y += alpha_d * dy;
        }
    }
    if let Some((_, _, p, lambda, r)) = best {
        it.p = p;
        it.lambda = lambda;
        [pinf, dinf, gap] = r;
    }
    let max_violation = problem.max_residual(&it.p, it.lambda);
    info!(
        "interior point {:?} after {iters} iterations: λ = {}, pinf {pinf:.2e}, dinf {dinf:.2e}, gap {gap:.2e}",
        status, it.lambda
    );
    Ok(SdpSolution {
        lambda: it.lambda,
        blocks: it.p,
        status,
        iterations: iters,
        primal_residual: pinf,
        dual_residual: dinf,
        gap,
        max_violation,
    })
}
