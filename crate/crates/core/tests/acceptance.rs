//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the lines always reach the output.
//! Criterion 11 needs tens of GB and is only attempted with
//! `SOSGAP_STRETCH=1`; otherwise it is reported as FAIL (not run).

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sosgap::certify::{augment_project, certify, residual, Verdict};
use sosgap::groupring::{ball, ball_with_limit, division_table, laplacian, twisted_mul};
use sosgap::groups::{GroupContext, GroupDescriptor, SAut, SpecialLinear, SymmetricGroup};
use sosgap::interval::Interval;
use sosgap::pipeline::{Config, Pipeline, Stage};
use sosgap::sdp::{build_sop, delta_pairings, reconstruct};
use sosgap::symmetry::{
    basis_orbits, minimal_projections, orbit_decompose, verify_projection_system, wedderburn_blocks, FiniteGroup,
    PermRepresentation, RankTolerance, SymmetryKind,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn generator_count() -> Outcome {
    let g = SAut::new(5).map_err(err)?;
    let s = g.generators().len();
    ensure(s == 80, format!("|S| = {s}"))?;
    ensure(!g.has_involution(), "S contains an involution")?;
    Ok("SAut(F5): |S| = 80, no involutions".into())
}

fn ball_size() -> Outcome {
    let g = SAut::new(5).map_err(err)?;
    let e = ball(&g, 2).map_err(err)?;
    ensure(e.len() == 4641, format!("|B2| = {}", e.len()))?;
    Ok("SAut(F5): |B2| = 4641".into())
}

fn block_census() -> Outcome {
    let sigma = FiniteGroup::new(SymmetryKind::Signed, 5).map_err(err)?;
    let sys = minimal_projections(&sigma).map_err(err)?;
    // checks p* = p, p² = p, primitivity and pairwise orthogonality exactly
    verify_projection_system(&sigma, &sys).map_err(err)?;
    ensure(sys.len() == 36, format!("{} projections", sys.len()))?;
    ensure(sigma.class_count() == 36, "class count differs")?;
    Ok("Z/2 wr S5: 36 minimal projections verified in exact rationals".into())
}

fn multiplicities() -> Outcome {
    let g = SAut::new(5).map_err(err)?;
    let e = ball(&g, 2).map_err(err)?;
    let sigma = FiniteGroup::new(SymmetryKind::Signed, 5).map_err(err)?;
    let sys = minimal_projections(&sigma).map_err(err)?;
    let prep = PermRepresentation::new(&g, &e, &sigma).map_err(err)?;
    let orbits = orbit_decompose(e.len(), &prep.gen_perms);
    let reps = prep.expand(&sigma);
    let blocks = wedderburn_blocks(&sys, &reps, &orbits, &RankTolerance::default(), 1).map_err(err)?;
    let dm: usize = blocks.iter().map(|b| b.dim * b.multiplicity).sum();
    let m2: usize = blocks.iter().map(|b| b.multiplicity * b.multiplicity).sum();
    ensure(dm == 4641 && m2 == 13232, format!("Σ dim·m = {dm}, Σ m² = {m2}"))?;
    Ok("SAut(F5), E = B2: Σ dim·m = 4641, Σ m² = 13232".into())
}

/// Smallest nonzero eigenvalue of the Cayley-graph Laplacian of a finite group.
fn cayley_gap<G: GroupContext>(g: &G) -> f64 {
    let all = ball(g, 64).unwrap();
    let s = g.generators();
    let n = all.len();
    let mut l = DMatrix::<f64>::identity(n, n) * s.len() as f64;
    for x in 0..n {
        for a in &s {
            let y = all.position(g, &g.mul(all.elem(x), a)).unwrap();
            l[(x, y)] -= 1.0;
        }
    }
    l.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .filter(|&v| v > 1e-9)
        .fold(f64::INFINITY, f64::min)
}

struct Run {
    lambda0: f64,
    lambda_cert: f64,
    kappa: Option<f64>,
    verdict: Verdict,
}

/// Every stage through `recheck`, in a scratch directory.
fn pipeline(config: Config) -> Result<Run, String> {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut p = Pipeline::open(dir.path(), Some(config)).map_err(err)?;
    p.run_through(Stage::Recheck).map_err(err)?;
    let c = p.certificate().map_err(err)?;
    Ok(Run {
        lambda0: c.lambda0.0,
        lambda_cert: c.lambda_cert.0,
        kappa: c.kappa.map(|k| k.0),
        verdict: c.verdict,
    })
}

fn finite_oracle() -> Outcome {
    let mut lines = Vec::new();
    for (n, radius) in [(3, 2), (4, 3)] {
        let g = SymmetricGroup::new(n).map_err(err)?;
        // E must be the whole group
        let e = ball(&g, radius).map_err(err)?;
        ensure(e.len() == (1..=n).product::<usize>(), format!("B{radius} is not all of S{n}"))?;
        let oracle = cayley_gap(&g);
        let run = pipeline(Config {
            group: GroupDescriptor::Sym(n),
            radius,
            symmetry: SymmetryKind::Permutations,
            ..Config::default()
        })?;
        ensure(
            (run.lambda0 - oracle).abs() <= 1e-5,
            format!("S{n}: λ₀ = {} vs oracle {oracle}", run.lambda0),
        )?;
        let floor = if n == 3 { 2.999 } else { oracle - 1e-3 };
        ensure(
            run.verdict == Verdict::Certified && run.lambda_cert >= floor,
            format!("S{n}: λ_cert = {}", run.lambda_cert),
        )?;
        lines.push(format!("S{n}: λ₀ = {:.8} (oracle {oracle:.8}), λ_cert = {:.6}", run.lambda0, run.lambda_cert));
    }
    Ok(lines.join("; "))
}

fn negative_control() -> Outcome {
    let run = pipeline(Config {
        group: GroupDescriptor::Zn(2),
        radius: 2,
        symmetry: SymmetryKind::Signed,
        ..Config::default()
    })?;
    ensure(run.lambda0 <= 1e-6, format!("λ₀ = {:e}", run.lambda0))?;
    ensure(run.verdict == Verdict::Inconclusive, "verdict is not inconclusive")?;
    Ok(format!("Z^2: λ₀ = {:.2e}, verdict inconclusive", run.lambda0))
}

fn sl3_end_to_end() -> Outcome {
    let run = pipeline(Config {
        group: GroupDescriptor::Sl(3),
        radius: 2,
        symmetry: SymmetryKind::Signed,
        ..Config::default()
    })?;
    ensure(run.verdict == Verdict::Certified && run.lambda_cert > 0.0, format!("λ_cert = {}", run.lambda_cert))?;
    Ok(format!(
        "SL(3,Z), E = B2: λ₀ = {:.6}, λ_cert = {:.6}, κ = {:.5}, recheck bit-exact",
        run.lambda0,
        run.lambda_cert,
        run.kappa.unwrap_or(0.0)
    ))
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn published_arithmetic() -> Outcome {
    let b = certify(1.3, 8.41e-6, 4, 80);
    let kappa = b.kappa.ok_or("no κ")?;
    ensure(b.lambda_cert >= 1.2999, format!("λ_cert = {}", b.lambda_cert))?;
    ensure(kappa > 0.18027, format!("κ = {kappa}"))?;
    // rounding went down: λ_cert ≤ 1.3 − 4·8.41e-6 and 40κ² ≤ λ_cert exactly
    let exact = q(1.3) - q(8.41e-6) * BigRational::from_integer(4.into());
    ensure(q(b.lambda_cert) <= exact, "λ_cert above the exact value")?;
    ensure(q(kappa) * q(kappa) * BigRational::from_integer(40.into()) <= q(b.lambda_cert), "κ rounded up")?;
    Ok(format!("λ_cert = {:.7} ≥ 1.2999, κ = {kappa:.7} > 0.18027", b.lambda_cert))
}

fn random_f64(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..8) {
        0 => rng.gen_range(-64i64..64) as f64,
        1 => 0.0,
        _ => {
            let m: f64 = rng.gen_range(1.0..2.0);
            let e = rng.gen_range(-40..40);
            let s = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            s * m * 2f64.powi(e)
        }
    }
}

fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let a = random_f64(rng);
    if rng.gen_bool(0.4) {
        return Interval::point(a);
    }
    let b = a + a.abs() * rng.gen_range(0.0..1e-3) + rng.gen_range(0.0..1e-9);
    Interval::new(a, b.max(a))
}

fn contains_q(i: &Interval, x: &BigRational) -> bool {
    q(i.lo()) <= *x && *x <= q(i.hi())
}

/// A rational point of `i`: an endpoint or a dyadic interior point.
fn pick(i: &Interval, rng: &mut ChaCha8Rng) -> BigRational {
    match rng.gen_range(0..3) {
        0 => q(i.lo()),
        1 => q(i.hi()),
        _ => {
            let u = BigRational::new(rng.gen_range(0..=1024).into(), 1024.into());
            q(i.lo()) + (q(i.hi()) - q(i.lo())) * u
        }
    }
}

fn interval_soundness() -> Outcome {
    const TARGET: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut count = |ok: bool, checks: &mut usize| {
        *checks += 1;
        if !ok {
            violations += 1;
        }
    };

    // the residual pipeline on SAut(F₂): E = B₁ many times, E = B₂ once
    let g = SAut::new(2).map_err(err)?;
    let mut residual_checks = 0;
    for (radius, instances) in [(2usize, 1usize), (1, 3000)] {
        let e = ball(&g, radius).map_err(err)?;
        let e2 = ball(&g, 2 * radius).map_err(err)?;
        let s = g.generators().len();
        let t1 = division_table(&g, &e.prefix(1), &e2).map_err(err)?;
        let m = division_table(&g, &e, &e2).map_err(err)?;
        let d = laplacian::<i64>(s + 1, s);
        let d2 = twisted_mul(&d, &d, &t1);
        let d = d.extend_to(e2.len());
        let di = d.map(|&c| Interval::from_i64(c));
        let d2i = d2.map(|&c| Interval::from_i64(c));
        let n = e.len();
        for _ in 0..instances {
            let scale = 2f64.powi(rng.gen_range(-4..4));
            let qm = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0) * scale);
            let lambda0 = rng.gen_range(0.0..3.0);
            let w = augment_project(&qm);
            let r = residual(&w, lambda0, &di, &d2i, &m).map_err(err)?;
            // the exact augmentation-ideal projection of q, in rationals
            let nq = BigRational::from_integer((n as i64).into());
            let mut xi = vec![BigRational::zero(); n * n];
            for i in 0..n {
                let mean = (0..n).fold(BigRational::zero(), |acc, x| acc + q(qm[(x, i)])) / &nq;
                for x in 0..n {
                    xi[x * n + i] = q(qm[(x, i)]) - &mean;
                    count(contains_q(&w.get(x, i), &xi[x * n + i]), &mut checks);
                }
            }
            let l = q(lambda0);
            let mut exact: Vec<BigRational> = (0..m.target_len())
                .map(|t| BigRational::from_integer(d2.coeffs()[t].into()) - &l * BigRational::from_integer(d.coeffs()[t].into()))
                .collect();
            for x in 0..n {
                for y in 0..n {
                    let dot = (0..n).fold(BigRational::zero(), |acc, i| acc + &xi[x * n + i] * &xi[y * n + i]);
                    exact[m.get(x, y)] -= dot;
                }
            }
            for (c, x) in r.coeffs.iter().zip(&exact) {
                count(contains_q(c, x), &mut checks);
            }
            let norm = exact.iter().fold(BigRational::zero(), |acc, c| acc + c.abs());
            count(contains_q(&r.norm, &norm), &mut checks);
        }
        residual_checks = checks;
    }

    // primitives, against exact results at rational points of the operands
    while checks < TARGET {
        let (a, b) = (random_interval(&mut rng), random_interval(&mut rng));
        let (x, y) = (pick(&a, &mut rng), pick(&b, &mut rng));
        count(contains_q(&a.add(&b), &(&x + &y)), &mut checks);
        count(contains_q(&a.sub(&b), &(&x - &y)), &mut checks);
        count(contains_q(&a.mul(&b), &(&x * &y)), &mut checks);
        if b.lo() > 0.0 || b.hi() < 0.0 {
            count(contains_q(&a.div(&b), &(&x / &y)), &mut checks);
        }
        let p = a.abs();
        let s = p.sqrt();
        let z = pick(&p, &mut rng);
        // √z ∈ s  ⇔  lo² ≤ z ≤ hi² for non-negative endpoints
        count(q(s.lo()) * q(s.lo()) <= z && z <= q(s.hi()) * q(s.hi()), &mut checks);
        count(contains_q(&a.abs(), &x.abs()), &mut checks);
    }
    ensure(violations == 0, format!("{violations} violations in {checks} checks"))?;
    Ok(format!(
        "{checks} containment checks ({residual_checks} on SAut(F2) residuals), 0 violations"
    ))
}

fn reconstruction_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut trials = 0;
    let saut = SAut::new(2).map_err(err)?;
    let sl = SpecialLinear::new(2).map_err(err)?;
    worst = worst.max(reconstruction_trials(&saut, 1, 50, &mut trials)?);
    worst = worst.max(reconstruction_trials(&sl, 2, 50, &mut trials)?);
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    Ok(format!("{trials} random block solutions on SAut(F2) and SL(2,Z), max deviation {worst:.1e}"))
}

fn reconstruction_trials<G: GroupContext>(g: &G, radius: usize, n: usize, trials: &mut usize) -> Result<f64, String> {
    let e = ball(g, radius).map_err(err)?;
    let e2 = ball(g, 2 * radius).map_err(err)?;
    let m = division_table(g, &e, &e2).map_err(err)?;
    let sigma = FiniteGroup::new(SymmetryKind::Signed, g.symmetry_rank()).map_err(err)?;
    let sys = minimal_projections(&sigma).map_err(err)?;
    let prep = PermRepresentation::new(g, &e, &sigma).map_err(err)?;
    let reps = prep.expand(&sigma);
    let blocks = wedderburn_blocks(&sys, &reps, &orbit_decompose(e.len(), &prep.gen_perms), &RankTolerance::default(), 3)
        .map_err(err)?;
    let orbits = basis_orbits(g, &e2, &sigma.generator_elems()).map_err(err)?;
    let zeros = vec![0.0; e2.len()];
    let (sop, kept) = build_sop(&zeros, &zeros, &orbits, &blocks, &m).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(17 + radius as u64);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let ps: Vec<DMatrix<f64>> = sop
            .block_sizes
            .iter()
            .map(|&b| {
                let a = DMatrix::from_fn(b, b + 1, |_, _| rng.gen_range(-1.0..1.0));
                &a * a.transpose()
            })
            .collect();
        let p = reconstruct(&ps, &blocks, &kept, &reps);
        let lhs = delta_pairings(&p, &m);
        for (t, &o) in orbits.orbit_of.iter().enumerate() {
            worst = worst.max((lhs[t] - sop.residual(o as usize, &ps, 0.0)).abs());
        }
        *trials += 1;
    }
    Ok(worst)
}

fn stretch() -> Outcome {
    if std::env::var("SOSGAP_STRETCH").as_deref() != Ok("1") {
        return Err("not run: |B4| for SAut(F5) needs >= 64 GB; set SOSGAP_STRETCH=1 to attempt".into());
    }
    let g = SAut::new(5).map_err(err)?;
    let b4 = ball_with_limit(&g, 4, 20_000_000).map_err(err)?;
    ensure(b4.len() == 11_154_301, format!("|B4| = {}", b4.len()))?;
    let sigma = FiniteGroup::new(SymmetryKind::Signed, 5).map_err(err)?;
    let orbits = basis_orbits(&g, &b4, &sigma.generator_elems()).map_err(err)?;
    ensure(orbits.len() == 7229, format!("{} orbits", orbits.len()))?;
    Ok("SAut(F5): |B4| = 11154301, 7229 orbits".into())
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "generator count", generator_count),
        (2, "ball size", ball_size),
        (3, "block census", block_census),
        (4, "multiplicity accounting", multiplicities),
        (5, "finite-group oracle", finite_oracle),
        (6, "negative control", negative_control),
        (7, "end-to-end SL(3,Z)", sl3_end_to_end),
        (8, "certification arithmetic", published_arithmetic),
        (9, "interval soundness", interval_soundness),
        (10, "reconstruction identity", reconstruction_identity),
        (11, "stretch: B4 of SAut(F5)", stretch),
    ];
    let mut required_failures = 0;
    for (k, name, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {k:>2} PASS  {name}: {msg} ({secs:.2} s)"),
            Err(msg) => {
                println!("criterion {k:>2} FAIL  {name}: {msg} ({secs:.2} s)");
                if k != 11 {
                    required_failures += 1;
                }
            }
        }
    }
    if required_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
