use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::groupring::{ball, division_table, Basis};
use crate::groups::{FreeAbelian, GroupContext, SAut, SpecialLinear, SymmetricGroup};
use crate::symmetry::{
    minimal_projections, orbit_decompose, wedderburn_blocks, FiniteGroup, PermRepresentation,
    RankTolerance, SymmetryKind,
};

struct Instance<T> {
    e: Basis<T>,
    table: DivisionTable,
    delta: Vec<f64>,
    delta_sq: Vec<f64>,
}

fn instance<G: GroupContext>(ctx: &G, r: usize) -> Instance<G::Elem> {
    let e = ball(ctx, r).unwrap();
    let e2 = ball(ctx, 2 * r).unwrap();
    let b1 = e.prefix(1);
    let t1 = division_table(ctx, &b1, &e2).unwrap();
    let table = division_table(ctx, &e, &e2).unwrap();
    let (delta, delta_sq) = laplacian_coefficients(ctx.generators().len(), &t1);
    Instance {
        e,
        table,
        delta,
        delta_sq,
    }
}

struct Sym {
    orbits: OrbitDecomposition,
    blocks: Vec<IrrepBlock>,
    reps: Vec<Vec<u32>>,
}

fn symmetrize<G: GroupContext>(ctx: &G, inst: &Instance<G::Elem>, kind: SymmetryKind) -> Sym {
    let sigma = FiniteGroup::new(kind, ctx.symmetry_rank()).unwrap();
    let sys = minimal_projections(&sigma).unwrap();
    let e2 = ball(ctx, 2 * inst.e.radius()).unwrap();
    let prep = PermRepresentation::new(ctx, &inst.e, &sigma).unwrap();
    let e_orbits = orbit_decompose(inst.e.len(), &prep.gen_perms);
    let reps = prep.expand(&sigma);
    let blocks = wedderburn_blocks(&sys, &reps, &e_orbits, &RankTolerance::default(), 7).unwrap();
    let big = PermRepresentation::new(ctx, &e2, &sigma).unwrap();
    let orbits = orbit_decompose(e2.len(), &big.gen_perms);
    Sym {
        orbits,
        blocks,
        reps,
    }
}

/// Smallest nonzero eigenvalue of `|S| − A` on the Cayley graph of a finite group.
fn cayley_gap<G: GroupContext>(ctx: &G) -> f64 {
    let g = ball(ctx, 64).unwrap();
    let s = ctx.generators();
    let n = g.len();
    let mut l = DMatrix::<f64>::identity(n, n) * s.len() as f64;
    for x in 0..n {
        for a in &s {
            let y = g.position(ctx, &ctx.mul(g.elem(x), a)).unwrap();
            l[(x, y)] -= 1.0;
        }
    }
    let eig = l.symmetric_eigen().eigenvalues;
    eig.iter().copied().filter(|&v| v > 1e-9).fold(f64::INFINITY, f64::min)
}

fn random_psd(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m + 1, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose()
}

#[test]
fn op_shape_and_identity_row() {
    let g = SAut::new(2).unwrap();
    let inst = instance(&g, 1);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let (cons, vars) = op_dimensions(inst.e.len(), inst.table.target_len());
    assert_eq!(p.constraint_count(), cons);
    assert_eq!(p.variable_count(), vars);
    // row e: λ-coefficient |S|, RHS (Δ²)_e = |S|² + |S|, unit diagonal
    let c0 = &p.constraints[0];
    assert_eq!(c0.lambda_coeff, 8.0);
    assert_eq!(c0.rhs, 72.0);
    assert_eq!(c0.entries.len(), inst.e.len());
    assert!(c0.entries.iter().all(|&(_, i, j, v)| i == j && v == 1.0));
    // ⟨δ_t, P⟩ counts pairs
    let ones = DMatrix::from_element(inst.e.len(), inst.e.len(), 1.0);
    let counts = delta_pairings(&ones, &inst.table);
    for t in 0..cons {
        let r = p.residual(t, &[ones.clone()], 0.0) + p.constraints[t].rhs;
        assert!((r - counts[t]).abs() < 1e-12);
    }
}

#[test]
fn s3_full_group_matches_laplacian_gap() {
    let g = SymmetricGroup::new(3).unwrap();
    let gap = cayley_gap(&g);
    assert!((gap - 3.0).abs() < 1e-9);
    let inst = instance(&g, 2);
    assert_eq!(inst.e.len(), 6);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Converged);
    assert!((sol.lambda - gap).abs() <= 1e-6, "{}", sol.lambda);
    assert!(sol.max_violation < 1e-6);
}

#[test]
fn s4_full_group_matches_laplacian_gap() {
    let g = SymmetricGroup::new(4).unwrap();
    let gap = cayley_gap(&g);
    let inst = instance(&g, 6);
    assert_eq!(inst.e.len(), 24);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert!((sol.lambda - gap).abs() <= 1e-5, "{} vs {gap}", sol.lambda);
}

#[test]
fn free_abelian_has_no_gap() {
    let g = FreeAbelian::new(2).unwrap();
    let inst = instance(&g, 2);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let ones = vec![vec![1.0; inst.e.len()]];
    let sol = solve_on_face(&p, &ones, &SolverConfig::default()).unwrap();
    assert!(sol.lambda <= 1e-6, "{}", sol.lambda);
    assert!(sol.max_violation < 1e-6);
    // the face blocks annihilate 𝟙
    let v = &sol.blocks[0] * nalgebra::DVector::from_element(inst.e.len(), 1.0);
    assert!(v.amax() < 1e-12);
}

#[test]
fn both_methods_agree() {
    let g = SymmetricGroup::new(3).unwrap();
    let inst = instance(&g, 2);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let ipm = solve(&p, &SolverConfig { method: SolverMethod::InteriorPoint, ..Default::default() }).unwrap();
    let admm = solve(&p, &SolverConfig { method: SolverMethod::Admm, ..Default::default() }).unwrap();
    assert_eq!(admm.status, SolveStatus::Converged);
    assert!((ipm.lambda - admm.lambda).abs() < 1e-6, "{} {}", ipm.lambda, admm.lambda);
    for b in &admm.blocks {
        assert!(crate::linalg::sym_eigen(b).0.min() >= -1e-12);
    }
}

#[test]
fn enlarging_the_support_does_not_lower_lambda() {
    let g = SymmetricGroup::new(3).unwrap();
    let cfg = SolverConfig::default();
    let small = instance(&g, 1);
    let big = instance(&g, 2);
    let l1 = solve(&build_op(&small.delta, &small.delta_sq, &small.table), &cfg).unwrap().lambda;
    let l2 = solve(&build_op(&big.delta, &big.delta_sq, &big.table), &cfg).unwrap().lambda;
    assert!(l2 >= l1 - 1e-6, "{l1} > {l2}");
}

#[test]
fn trivial_symmetry_gives_the_plain_problem() {
    let g = SymmetricGroup::new(3).unwrap();
    let inst = instance(&g, 2);
    let sym = symmetrize(&g, &inst, SymmetryKind::Trivial);
    let (sop, kept) = build_sop(&inst.delta, &inst.delta_sq, &sym.orbits, &sym.blocks, &inst.table).unwrap();
    let op = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    assert_eq!(sop.constraint_count(), op.constraint_count());
    assert_eq!(sop.block_sizes, vec![inst.e.len()]);
    let cfg = SolverConfig::default();
    let a = solve(&sop, &cfg).unwrap();
    let b = solve(&op, &cfg).unwrap();
    assert!((a.lambda - b.lambda).abs() < 1e-6);
    let p = reconstruct(&a.blocks, &sym.blocks, &kept, &sym.reps);
    assert!(op.max_residual(&[p], a.lambda) < 1e-6);
}

#[test]
fn single_identity_block_reconstructs_to_itself() {
    let n = 4;
    let block = IrrepBlock {
        label: crate::symmetry::IrrepLabel::Trivial,
        dim: 1,
        multiplicity: n,
        u: DMatrix::identity(n, n),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = random_psd(n, &mut rng);
    let reps = vec![(0..n as u32).collect::<Vec<_>>()];
    let out = reconstruct(&[p.clone()], &[block], &[0], &reps);
    assert!((out - p).abs().max() < 1e-14);
}

#[test]
fn sl3_sop_has_one_constraint_per_orbit() {
    let g = SpecialLinear::new(3).unwrap();
    let inst = instance(&g, 1);
    let sym = symmetrize(&g, &inst, SymmetryKind::Signed);
    let (sop, _) = build_sop(&inst.delta, &inst.delta_sq, &sym.orbits, &sym.blocks, &inst.table).unwrap();
    // orbit count the long way: distinct orbits among conjugates of E2
    let sigma = FiniteGroup::new(SymmetryKind::Signed, 3).unwrap();
    let e2 = ball(&g, 2).unwrap();
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for x in e2.elems() {
        if seen.insert(g.key(x)) {
            count += 1;
            for s in sigma.elems() {
                seen.insert(g.key(&g.conjugate(s, x)));
            }
        }
    }
    assert_eq!(sop.constraint_count(), count);
    assert_eq!(sym.orbits.len(), count);
}

fn check_reconstruction<G: GroupContext>(ctx: &G, r: usize, kind: SymmetryKind, trials: usize) -> f64 {
    let inst = instance(ctx, r);
    let sym = symmetrize(ctx, &inst, kind);
    let zeros = vec![0.0; inst.delta.len()];
    let (sop, kept) = build_sop(&zeros, &zeros, &sym.orbits, &sym.blocks, &inst.table).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let ps: Vec<DMatrix<f64>> = sop.block_sizes.iter().map(|&m| random_psd(m, &mut rng)).collect();
        let p = reconstruct(&ps, &sym.blocks, &kept, &sym.reps);
        let lhs = delta_pairings(&p, &inst.table);
        for (t, &o) in sym.orbits.orbit_of.iter().enumerate() {
            let rhs = sop.residual(o as usize, &ps, 0.0);
            worst = worst.max((lhs[t] - rhs).abs() / (1.0 + rhs.abs()));
        }
        // invariance under Σ
        for rep in sym.reps.iter().step_by(3) {
            for i in 0..p.nrows() {
                for j in 0..p.ncols() {
                    let d = p[(rep[i] as usize, rep[j] as usize)] - p[(i, j)];
                    worst = worst.max(d.abs());
                }
            }
        }
    }
    worst
}

#[test]
fn reconstruction_identity_saut2() {
    let g = SAut::new(2).unwrap();
    assert!(check_reconstruction(&g, 1, SymmetryKind::Signed, 5) < 1e-10);
}

#[test]
fn reconstruction_identity_sl2() {
    let g = SpecialLinear::new(2).unwrap();
    assert!(check_reconstruction(&g, 2, SymmetryKind::Signed, 3) < 1e-10);
    assert!(check_reconstruction(&g, 2, SymmetryKind::Permutations, 3) < 1e-10);
}

#[test]
fn sop_not_orbit_constant_is_rejected() {
    let g = SpecialLinear::new(2).unwrap();
    let inst = instance(&g, 1);
    let sym = symmetrize(&g, &inst, SymmetryKind::Signed);
    let mut bad = inst.delta.clone();
    bad[1] += 1.0;
    let err = build_sop(&bad, &inst.delta_sq, &sym.orbits, &sym.blocks, &inst.table).unwrap_err();
    assert!(matches!(err, Error::NotOrbitConstant { .. }));
}

#[test]
fn sdpa_round_trip() {
    let toy = SdpProblem {
        block_sizes: vec![2],
        constraints: vec![
            Constraint {
                entries: vec![(0, 0, 0, 1.0), (0, 0, 1, 0.1)],
                lambda_coeff: -1.0 / 3.0,
                rhs: 2.5e-300,
            },
            Constraint {
                entries: vec![(0, 1, 1, std::f64::consts::PI)],
                lambda_coeff: 0.0,
                rhs: -7.0,
            },
        ],
    };
    assert_eq!(parse_sdpa(&format_sdpa(&toy)).unwrap(), toy);

    let empty = SdpProblem {
        block_sizes: vec![],
        constraints: vec![],
    };
    let text = format_sdpa(&empty);
    assert!(text.ends_with("\n0\n0\n\n\n"));
    assert_eq!(parse_sdpa(&text).unwrap(), empty);

    let g = SAut::new(2).unwrap();
    let inst = instance(&g, 1);
    let sym = symmetrize(&g, &inst, SymmetryKind::Signed);
    let (sop, _) = build_sop(&inst.delta, &inst.delta_sq, &sym.orbits, &sym.blocks, &inst.table).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.dat-s");
    write_sdpa(&sop, &path).unwrap();
    assert_eq!(read_sdpa(&path).unwrap(), sop);
}


#[test]
fn sdpa_rejects_garbage() {
    assert!(parse_sdpa("1\n1\n2\n").is_err());
    assert!(parse_sdpa("1\n2\n2 -2\n1\n0 2 1 1 1\n0 2 2 2 -1\n1 1 3 3 1\n").is_err());
    assert!(parse_sdpa("1\n2\n2 -2\n1\n1 1 1 1 1\n").is_err());
}

#[test]
fn checkpoint_resume_is_exact() {
    let g = SymmetricGroup::new(3).unwrap();
    let inst = instance(&g, 2);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.bin");
    let base = SolverConfig {
        method: SolverMethod::Admm,
        max_iters: 300,
        accuracy: 1e-14,
        ..SolverConfig::default()
    };
    let straight = solve(&p, &base).unwrap();
    let first = SolverConfig {
        max_iters: 100,
        checkpoint_every: 100,
        checkpoint: Some(ck.clone()),
        ..base.clone()
    };
    solve(&p, &first).unwrap();
    let resumed = solve(
        &p,
        &SolverConfig {
            max_iters: 300,
            checkpoint_every: 0,
            ..first
        },
    )
    .unwrap();
    assert_eq!(resumed.iterations, straight.iterations);
    assert_eq!(resumed.lambda.to_bits(), straight.lambda.to_bits());
    let again = solve(&p, &base).unwrap();
    assert_eq!(again.lambda.to_bits(), straight.lambda.to_bits());
}

#[test]
fn external_solver_agrees() {
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/solve_sdpa.py");
    let probe = std::process::Command::new("python3").args(["-c", "import cvxpy"]).output();
    if !matches!(probe, Ok(ref o) if o.status.success()) {
        eprintln!("skipping: python3 with cvxpy not available");
        return;
    }
    let g = SymmetricGroup::new(3).unwrap();
    let inst = instance(&g, 2);
    let p = build_op(&inst.delta, &inst.delta_sq, &inst.table);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.dat-s");
    write_sdpa(&p, &path).unwrap();
    let out = std::process::Command::new("python3").arg(script).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let external: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    let ours = solve(&p, &SolverConfig::default()).unwrap().lambda;
    assert!((external - ours).abs() <= 1e-6, "{external} vs {ours}");
}
