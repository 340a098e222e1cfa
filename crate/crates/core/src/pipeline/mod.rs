//! Resumable stages over one artifact directory.
//!
//! Every stage reads only hash-verified outputs of its upstream stages and
//! records its own outputs in `manifest.json`. A stage's fingerprint covers
//! its parameters and the hashes it consumed, so rerunning with unchanged
//! inputs is a no-op and a changed upstream makes downstream records stale.

pub mod artifacts;
mod manifest;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use manifest::{read_verified, sha256_hex, write_atomic, Manifest, StageRecord, MANIFEST_FILE};

use crate::certify::{
    augment_project, certify, order_unit_exponent, order_unit_factor, real_sqrt, recheck_residual, residual,
    witness_from_bytes, witness_to_bytes, Certificate, HexFloat, Verdict, WitnessRef, TAU_NEG,
};
use crate::groupring::{ball_with_limit, division_table, laplacian, twisted_mul, Basis, GroupRingElem};
use crate::groups::{FreeAbelian, GroupContext, GroupDescriptor, SAut, SpecialLinear, SymmetricGroup};
use crate::interval::Interval;
use crate::sdp::{
    augmentation_kernels, build_op, build_sop, format_sdpa, parse_sdpa, reconstruct, solve_on_face, Face,
    SolveStatus, SolverConfig,
};
use crate::symmetry::{
    basis_orbits, minimal_projections, orbit_decompose, verify_projection_system, wedderburn_blocks,
    FiniteGroup, PermRepresentation, RankTolerance, SymmetryKind,
};
use crate::{Error, Result};
use artifacts::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// One block per irreducible of Σ, one constraint per orbit.
    Sop,
    /// One `|E|×|E|` block, one constraint per element of E⁻¹E.
    Op,
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sop" | "symmetrized" => Ok(Self::Sop),
            "op" | "plain" => Ok(Self::Op),
            other => Err(Error::Config(format!("unknown formulation `{other}`"))),
        }
    }
}

/// `family:n`, the form accepted by `GroupDescriptor::from_str`.
pub fn group_name(g: &GroupDescriptor) -> String {
    match *g {
        GroupDescriptor::Saut(n) => format!("saut:{n}"),
        GroupDescriptor::Sl(n) => format!("sl:{n}"),
        GroupDescriptor::Sym(n) => format!("sym:{n}"),
        GroupDescriptor::Zn(n) => format!("z:{n}"),
    }
}

mod group_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(g: &GroupDescriptor, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&group_name(g))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<GroupDescriptor, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The declarative run description, usually read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(with = "group_serde")]
    pub group: GroupDescriptor,
    /// E = B_radius; constraints live on B_{2·radius}.
    pub radius: usize,
    pub symmetry: SymmetryKind,
    pub formulation: Formulation,
    pub seed: u64,
    pub tau_neg: f64,
    /// Ball sizes above this need `--big`.
    pub max_elements: usize,
    pub solver: SolverConfig,
    pub rank: RankTolerance,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            group: GroupDescriptor::Sl(3),
            radius: 2,
            symmetry: SymmetryKind::Signed,
            formulation: Formulation::Sop,
            seed: 1,
            tau_neg: TAU_NEG,
            max_elements: 2_000_000,
            solver: SolverConfig::default(),
            rank: RankTolerance::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Ball,
    Table,
    Preps,
    Wedderburn,
    Orbits,
    BuildSdp,
    Solve,
    Reconstruct,
    Certify,
    Recheck,
    Report,
    ExportSdpa,
}

impl Stage {
    /// In dependency order.
    pub const ALL: [Stage; 12] = [
        Stage::Ball,
        Stage::Table,
        Stage::Preps,
        Stage::Wedderburn,
        Stage::Orbits,
        Stage::BuildSdp,
        Stage::Solve,
        Stage::Reconstruct,
        Stage::Certify,
        Stage::Recheck,
        Stage::Report,
        Stage::ExportSdpa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ball => "ball",
            Stage::Table => "table",
            Stage::Preps => "preps",
            Stage::Wedderburn => "wedderburn",
            Stage::Orbits => "orbits",
            Stage::BuildSdp => "build-sdp",
            Stage::Solve => "solve",
            Stage::Reconstruct => "reconstruct",
            Stage::Certify => "certify",
            Stage::Recheck => "recheck",
            Stage::Report => "report",
            Stage::ExportSdpa => "export-sdpa",
        }
    }

    pub fn upstream(self, f: Formulation) -> &'static [Stage] {
        use Stage::*;
        match (self, f) {
            (Ball, _) => &[],
            (Table | Preps | Orbits, _) => &[Ball],
            (Wedderburn, _) => &[Preps],
            (BuildSdp, Formulation::Sop) => &[Ball, Table, Wedderburn, Orbits],
            (BuildSdp, Formulation::Op) => &[Ball, Table],
            (Solve, _) => &[BuildSdp],
            (Reconstruct, Formulation::Sop) => &[Preps, Wedderburn, BuildSdp, Solve],
            (Reconstruct, Formulation::Op) => &[Solve],
            (Certify, _) => &[Ball, Table, Solve, Reconstruct],
            (Recheck, _) => &[Ball, Table, Certify],
            (Report, _) => &[Certify],
            (ExportSdpa, _) => &[BuildSdp],
        }
    }

    /// `target` and everything it transitively needs, in dependency order.
    pub fn plan(target: Stage, f: Formulation) -> Vec<Stage> {
        let mut need = vec![target];
        let mut k = 0;
        while k < need.len() {
            for &u in need[k].upstream(f) {
                if !need.contains(&u) {
                    need.push(u);
                }
            }
            k += 1;
        }
        need.sort();
        need
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageRun {
    pub stage: Stage,
    /// False when the recorded outputs were already current.
    pub ran: bool,
    pub info: serde_json::Value,
}

/// Verified upstream outputs, by file name.
struct Inputs {
    root: PathBuf,
    files: BTreeMap<String, (Vec<u8>, String)>,
}

impl Inputs {
    fn get(&self, name: &str) -> Result<&[u8]> {
        self.files
            .get(name)
            .map(|(b, _)| b.as_slice())
            .ok_or_else(|| Error::Artifact {
                path: self.root.join(name),
                msg: "not produced by any upstream stage".into(),
            })
    }

    fn hash(&self, name: &str) -> String {
        self.files.get(name).map(|(_, h)| h.clone()).unwrap_or_default()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

struct Output {
    files: Vec<(String, Vec<u8>)>,
    info: serde_json::Value,
}

macro_rules! with_group {
    ($desc:expr, $g:ident => $body:expr) => {
        match $desc {
            GroupDescriptor::Saut(n) => {
                let $g = &SAut::new(n)?;
                $body
            }
            GroupDescriptor::Sl(n) => {
                let $g = &SpecialLinear::new(n)?;
                $body
            }
            GroupDescriptor::Sym(n) => {
                let $g = &SymmetricGroup::new(n)?;
                $body
            }
            GroupDescriptor::Zn(n) => {
                let $g = &FreeAbelian::new(n)?;
                $body
            }
        }
    };
}

pub struct Pipeline {
    root: PathBuf,
    manifest: Manifest,
    big: bool,
}

impl Pipeline {
    /// Opens `root`. A given config replaces the recorded one; records made
    /// under different parameters then count as stale.
    pub fn open(root: &Path, config: Option<Config>) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        let manifest = match (Manifest::load(root)?, config) {
            (Some(mut m), Some(c)) => {
                m.config = c;
                m
            }
            (Some(m), None) => m,
            (None, Some(c)) => Manifest::new(c),
            (None, None) => {
                return Err(Error::Config(format!(
                    "no {MANIFEST_FILE} in {}; pass a config file",
                    root.display()
                )))
            }
        };
        validate(&manifest.config)?;
        manifest.save(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest,
            big: false,
        })
    }

    /// Lifts the element budget of high-memory stages.
    pub fn set_big(&mut self, big: bool) {
        self.big = big;
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &Config {
        &self.manifest.config
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn params(&self, stage: Stage) -> serde_json::Value {
        let c = &self.manifest.config;
        let group = group_name(&c.group);
        match stage {
            Stage::Ball | Stage::Table => json!({ "group": group, "radius": c.radius }),
            Stage::Preps | Stage::Orbits => json!({ "group": group, "symmetry": c.symmetry }),
            Stage::Wedderburn => json!({ "symmetry": c.symmetry, "rank": c.rank, "seed": c.seed }),
            Stage::BuildSdp | Stage::Reconstruct => json!({ "formulation": c.formulation }),
            Stage::Solve => {
                let mut s = c.solver.clone();
                // where and how often to checkpoint does not change the result
                s.checkpoint = None;
                s.checkpoint_every = 0;
                json!({ "solver": s, "seed": c.seed })
            }
            Stage::Certify => json!({ "group": group, "radius": c.radius, "tau_neg": c.tau_neg }),
            Stage::Recheck | Stage::Report | Stage::ExportSdpa => json!({}),
        }
    }

    /// `None` when some upstream has no record.
    fn fingerprint(&self, stage: Stage) -> Option<String> {
        let mut ups = BTreeMap::new();
        for &u in stage.upstream(self.manifest.config.formulation) {
            ups.insert(u.name(), &self.manifest.stages.get(u.name())?.outputs);
        }
        let doc = json!({ "stage": stage.name(), "params": self.params(stage), "upstream": ups });
        Some(sha256_hex(doc.to_string().as_bytes()))
    }

    /// Whether `stage` has a record matching the current parameters and upstream outputs.
    pub fn is_current(&self, stage: Stage) -> bool {
        match (self.manifest.stages.get(stage.name()), self.fingerprint(stage)) {
            (Some(rec), Some(fp)) => rec.fingerprint == fp,
            _ => false,
        }
    }

    fn gather_inputs(&self, stage: Stage) -> Result<Inputs> {
        let mut files = BTreeMap::new();
        for &u in stage.upstream(self.manifest.config.formulation) {
            let rec = self.manifest.stages.get(u.name()).ok_or_else(|| Error::MissingUpstream {
                stage: stage.name().into(),
                missing: u.name().into(),
            })?;
            if !self.is_current(u) {
                return Err(Error::StaleUpstream {
                    stage: stage.name().into(),
                    upstream: u.name().into(),
                });
            }
            for (name, hash) in &rec.outputs {
                let bytes = read_verified(&self.root, name, hash)?;
                files.insert(name.clone(), (bytes, hash.clone()));
            }
        }
        Ok(Inputs {
            root: self.root.clone(),
            files,
        })
    }

    fn outputs_verify(&self, rec: &StageRecord) -> bool {
        rec.outputs
            .iter()
            .all(|(name, hash)| read_verified(&self.root, name, hash).is_ok())
    }

    /// Runs one stage, or confirms that its recorded outputs are current.
    pub fn run(&mut self, stage: Stage) -> Result<StageRun> {
        let inputs = self.gather_inputs(stage)?;
        let fingerprint = self.fingerprint(stage).expect("upstream records checked");
        if let Some(rec) = self.manifest.stages.get(stage.name()) {
            if rec.fingerprint == fingerprint {
                if self.outputs_verify(rec) {
                    log::info!("{stage}: up to date");
                    return Ok(StageRun {
                        stage,
                        ran: false,
                        info: rec.info.clone(),
                    });
                }
                log::warn!("{stage}: recorded outputs changed on disk; recomputing");
            }
        }
        log::info!("{stage}: running");
        let out = self.execute(stage, &inputs)?;
        let mut outputs = BTreeMap::new();
        for (name, bytes) in &out.files {
            write_atomic(&self.root.join(name), bytes)?;
            outputs.insert(name.clone(), sha256_hex(bytes));
        }
        let record = StageRecord {
            fingerprint,
            params: self.params(stage),
            inputs: inputs.files.iter().map(|(k, (_, h))| (k.clone(), h.clone())).collect(),
            outputs,
            info: out.info.clone(),
            completed_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        self.manifest.stages.insert(stage.name().into(), record);
        self.manifest.save(&self.root)?;
        Ok(StageRun {
            stage,
            ran: true,
            info: out.info,
        })
    }

    /// Runs `target` after whatever it needs that is not current.
    pub fn run_through(&mut self, target: Stage) -> Result<Vec<StageRun>> {
        let plan = Stage::plan(target, self.manifest.config.formulation);
        plan.into_iter().map(|s| self.run(s)).collect()
    }

    /// The recorded certificate, hash-verified.
    pub fn certificate(&self) -> Result<Certificate> {
        let rec = self.manifest.stages.get(Stage::Certify.name()).ok_or_else(|| Error::MissingUpstream {
            stage: "report".into(),
            missing: "certify".into(),
        })?;
        let hash = rec.outputs.get(CERTIFICATE).map(String::as_str).unwrap_or_default();
        let bytes = read_verified(&self.root, CERTIFICATE, hash)?;
        Certificate::from_json(&String::from_utf8_lossy(&bytes))
    }

    fn execute(&self, stage: Stage, inp: &Inputs) -> Result<Output> {
        let c = self.manifest.config.clone();
        match stage {
            Stage::Ball => with_group!(c.group, g => self.ball(g)),
            Stage::Table => with_group!(c.group, g => table(g, &c, inp)),
            Stage::Preps => with_group!(c.group, g => preps(g, &c, inp)),
            Stage::Wedderburn => wedderburn(&c, inp),
            Stage::Orbits => with_group!(c.group, g => self.orbits(g, inp)),
            Stage::BuildSdp => build_sdp(&c, inp),
            Stage::Solve => self.solve(inp),
            Stage::Reconstruct => reconstruct_stage(&c, inp),
            Stage::Certify => with_group!(c.group, g => certify_stage(g, &c, inp)),
            Stage::Recheck => recheck_stage(inp),
            Stage::Report => report_stage(inp),
            Stage::ExportSdpa => export_stage(inp),
        }
    }

    fn ball<G: GroupContext>(&self, g: &G) -> Result<Output> {
        let c = &self.manifest.config;
        let limit = if self.big { usize::MAX } else { c.max_elements };
        let e2 = ball_with_limit(g, 2 * c.radius, limit).map_err(|e| match e {
            Error::MemoryBudget { found, .. } => Error::NeedsBig {
                estimate_mb: estimate_ball_mb(g, found),
            },
            e => e,
        })?;
        let s = g.generators().len();
        let b1 = e2.prefix(1);
        let t1 = division_table(g, &b1, &e2)?;
        let d = laplacian::<i64>(b1.len(), s);
        let sq = twisted_mul(&d, &d, &t1);
        let d = d.extend_to(e2.len());
        let info = json!({
            "generators": s,
            "e": e2.shell_sizes()[c.radius],
            "e2": e2.len(),
            "shells": e2.shell_sizes(),
        });
        Ok(Output {
            files: vec![
                (BASIS.into(), encode_basis(e2.shell_sizes(), e2.tree())),
                (DELTA.into(), encode_delta(d.coeffs(), sq.coeffs())),
            ],
            info,
        })
    }

    fn orbits<G: GroupContext>(&self, g: &G, inp: &Inputs) -> Result<Output> {
        let c = &self.manifest.config;
        let e2 = load_basis(g, inp)?;
        if !self.big && e2.len() > c.max_elements {
            return Err(Error::NeedsBig {
                estimate_mb: (e2.len() as u64 * 4 * (g.generators().len() as u64 + 4)) >> 20,
            });
        }
        let sigma = FiniteGroup::new(c.symmetry, g.symmetry_rank())?;
        let orbits = basis_orbits(g, &e2, &sigma.generator_elems())?;
        // the first shells must be unions of orbits for the blocks of E to make sense
        orbits.restrict(e2.shell_sizes()[c.radius])?;
        let info = json!({ "points": orbits.points(), "orbits": orbits.len() });
        Ok(Output {
            files: vec![(ORBITS.into(), encode_orbits(&orbits))],
            info,
        })
    }

    fn solve(&self, inp: &Inputs) -> Result<Output> {
        let problem = parse_sdpa(&String::from_utf8_lossy(inp.get(PROBLEM)?))?;
        let kernels = load_kernels(inp)?;
        let mut cfg = self.manifest.config.solver.clone();
        if let Some(p) = &cfg.checkpoint {
            cfg.checkpoint = Some(self.root.join(p));
        }
        let sol = solve_on_face(&problem, &kernels, &cfg)?;
        if sol.status != SolveStatus::Converged {
            log::warn!(
                "solve: {:?} before the requested accuracy; residuals {:e} / {:e}",
                sol.status,
                sol.primal_residual,
                sol.dual_residual
            );
        }
        let rec = SolveRecord {
            lambda: sol.lambda,
            status: sol.status,
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            gap: sol.gap,
            max_violation: sol.max_violation,
        };
        Ok(Output {
            files: vec![
                (LAMBDA.into(), encode_lambda(sol.lambda)),
                (SDP_BLOCKS.into(), encode_matrices(&sol.blocks)),
                (SOLVE_JSON.into(), serde_json::to_vec_pretty(&rec)?),
            ],
            info: serde_json::to_value(&rec)?,
        })
    }
}

pub const BASIS: &str = "basis.bin";
pub const DELTA: &str = "delta.bin";
pub const TABLE: &str = "pm.bin";
pub const PREPS: &str = "preps.bin";
pub const PROJECTIONS: &str = "projections.json";
pub const U_PIS: &str = "U_pis.bin";
pub const ORBITS: &str = "orbits.bin";
pub const PROBLEM: &str = "problem.dat-s";
pub const FACE: &str = "face.bin";
pub const SDP_JSON: &str = "sdp.json";
pub const LAMBDA: &str = "lambda.bin";
pub const SDP_BLOCKS: &str = "SDPblocks.bin";
pub const SOLVE_JSON: &str = "solve.json";
pub const SDP_MATRIX: &str = "SDPmatrix.bin";
pub const WITNESS: &str = "witness.bin";
pub const CERTIFICATE: &str = "certificate.json";
pub const RECHECK: &str = "recheck.json";
pub const REPORT: &str = "report.txt";
pub const EXPORT_PROBLEM: &str = "export/problem.dat-s";
pub const EXPORT_FACE: &str = "export/problem-face.dat-s";

fn validate(c: &Config) -> Result<()> {
    if c.radius == 0 {
        return Err(Error::Config("radius must be at least 1".into()));
    }
    if !(c.tau_neg >= 0.0) {
        return Err(Error::Config("tau_neg must be non-negative".into()));
    }
    Ok(())
}

/// Lower bound in MB once `found` elements exist: element, key and index entry.
fn estimate_ball_mb<G: GroupContext>(g: &G, found: usize) -> u64 {
    let key = g.key(&g.identity()).len() as u64;
    let per = 2 * key + std::mem::size_of::<G::Elem>() as u64 + 48;
    (found as u64 * per) >> 20
}

fn load_basis<G: GroupContext>(g: &G, inp: &Inputs) -> Result<Basis<G::Elem>> {
    let (shells, tree) = decode_basis(inp.get(BASIS)?, &inp.path(BASIS))?;
    Basis::from_tree(g, tree, shells)
}

fn load_delta(inp: &Inputs) -> Result<(Vec<i64>, Vec<i64>)> {
    decode_delta(inp.get(DELTA)?, &inp.path(DELTA))
}

fn load_kernels(inp: &Inputs) -> Result<Vec<Vec<f64>>> {
    Ok(decode_matrices(inp.get(FACE)?, &inp.path(FACE))?
        .into_iter()
        .map(|m| m.iter().copied().collect())
        .collect())
}

fn table<G: GroupContext>(g: &G, c: &Config, inp: &Inputs) -> Result<Output> {
    let e2 = load_basis(g, inp)?;
    let e = e2.prefix(c.radius);
    let m = division_table(g, &e, &e2)?;
    let info = json!({ "rows": m.size(), "targets": m.target_len() });
    Ok(Output {
        files: vec![(TABLE.into(), encode_table(&m))],
        info,
    })
}

fn preps<G: GroupContext>(g: &G, c: &Config, inp: &Inputs) -> Result<Output> {
    let e = load_basis(g, inp)?.prefix(c.radius);
    let sigma = FiniteGroup::new(c.symmetry, g.symmetry_rank())?;
    let prep = PermRepresentation::new(g, &e, &sigma)?;
    let sys = minimal_projections(&sigma)?;
    verify_projection_system(&sigma, &sys)?;
    let info = json!({ "sigma": sigma.order(), "projections": sys.len(), "points": prep.points });
    Ok(Output {
        files: vec![
            (PREPS.into(), encode_preps(&prep)),
            (PROJECTIONS.into(), encode_projections(&sys)),
        ],
        info,
    })
}

fn symmetry_group(c: &Config) -> Result<FiniteGroup> {
    let rank = with_group!(c.group, g => g.symmetry_rank());
    FiniteGroup::new(c.symmetry, rank)
}

fn wedderburn(c: &Config, inp: &Inputs) -> Result<Output> {
    let prep = decode_preps(inp.get(PREPS)?, &inp.path(PREPS))?;
    let sys = decode_projections(inp.get(PROJECTIONS)?, &inp.path(PROJECTIONS))?;
    let sigma = symmetry_group(c)?;
    if prep.gen_perms.len() != sigma.generators().len() {
        return Err(Error::Artifact {
            path: inp.path(PREPS),
            msg: "generator count differs from Σ".into(),
        });
    }
    let e_orbits = orbit_decompose(prep.points, &prep.gen_perms);
    let reps = prep.expand(&sigma);
    let blocks = wedderburn_blocks(&sys, &reps, &e_orbits, &c.rank, c.seed)?;
    let listing: Vec<_> = blocks
        .iter()
        .map(|b| json!({ "label": b.label.to_string(), "dim": b.dim, "multiplicity": b.multiplicity }))
        .collect();
    let info = json!({
        "blocks": listing,
        "sum_dim_m": blocks.iter().map(|b| b.dim * b.multiplicity).sum::<usize>(),
        "sum_m_sq": blocks.iter().map(|b| b.multiplicity * b.multiplicity).sum::<usize>(),
        "rank": c.rank,
    });
    Ok(Output {
        files: vec![(U_PIS.into(), encode_blocks(&blocks))],
        info,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SdpMeta {
    formulation: Formulation,
    /// Wedderburn block behind each problem block.
    kept: Vec<usize>,
    block_sizes: Vec<usize>,
    constraints: usize,
}

fn build_sdp(c: &Config, inp: &Inputs) -> Result<Output> {
    let m = decode_table(inp.get(TABLE)?, &inp.path(TABLE))?;
    let (d, d2) = load_delta(inp)?;
    let d: Vec<f64> = d.iter().map(|&v| v as f64).collect();
    let d2: Vec<f64> = d2.iter().map(|&v| v as f64).collect();
    let (problem, kept, kernels) = match c.formulation {
        Formulation::Sop => {
            let orbits = decode_orbits(inp.get(ORBITS)?, &inp.path(ORBITS))?;
            let blocks = decode_blocks(inp.get(U_PIS)?, &inp.path(U_PIS))?;
            let (p, kept) = build_sop(&d, &d2, &orbits, &blocks, &m)?;
            let k = augmentation_kernels(&blocks, &kept);
            (p, kept, k)
        }
        Formulation::Op => (build_op(&d, &d2, &m), vec![], vec![vec![1.0; m.size()]]),
    };
    let meta = SdpMeta {
        formulation: c.formulation,
        kept,
        block_sizes: problem.block_sizes.clone(),
        constraints: problem.constraint_count(),
    };
    let kernels: Vec<DMatrix<f64>> = kernels.iter().map(|k| DMatrix::from_column_slice(k.len(), 1, k)).collect();
    let info = json!({
        "block_sizes": meta.block_sizes,
        "constraints": meta.constraints,
        "variables": problem.variable_count(),
    });
    Ok(Output {
        files: vec![
            (PROBLEM.into(), format_sdpa(&problem).into_bytes()),
            (FACE.into(), encode_matrices(&kernels)),
            (SDP_JSON.into(), serde_json::to_vec_pretty(&meta)?),
        ],
        info,
    })
}

fn reconstruct_stage(c: &Config, inp: &Inputs) -> Result<Output> {
    let sol = decode_matrices(inp.get(SDP_BLOCKS)?, &inp.path(SDP_BLOCKS))?;
    let p = match c.formulation {
        Formulation::Op => sol.into_iter().next().ok_or_else(|| Error::Artifact {
            path: inp.path(SDP_BLOCKS),
            msg: "no blocks".into(),
        })?,
        Formulation::Sop => {
            let meta: SdpMeta = serde_json::from_slice(inp.get(SDP_JSON)?)?;
            let blocks = decode_blocks(inp.get(U_PIS)?, &inp.path(U_PIS))?;
            let prep = decode_preps(inp.get(PREPS)?, &inp.path(PREPS))?;
            if meta.kept.len() != sol.len() || meta.kept.iter().any(|&k| k >= blocks.len()) {
                return Err(Error::Dimension("solution blocks do not match the problem".into()));
            }
            let reps = prep.expand(&symmetry_group(c)?);
            reconstruct(&sol, &blocks, &meta.kept, &reps)
        }
    };
    let info = json!({ "size": p.nrows() });
    Ok(Output {
        files: vec![(SDP_MATRIX.into(), encode_matrices(&[p]))],
        info,
    })
}

fn interval_coeffs(v: &[i64]) -> Vec<Interval> {
    v.iter().map(|&x| Interval::from_i64(x)).collect()
}

fn certify_stage<G: GroupContext>(g: &G, c: &Config, inp: &Inputs) -> Result<Output> {
    let m = decode_table(inp.get(TABLE)?, &inp.path(TABLE))?;
    let (d, d2) = load_delta(inp)?;
    let lambda0 = decode_lambda(inp.get(LAMBDA)?, &inp.path(LAMBDA))?;
    let p = decode_matrices(inp.get(SDP_MATRIX)?, &inp.path(SDP_MATRIX))?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Artifact {
            path: inp.path(SDP_MATRIX),
            msg: "empty".into(),
        })?;
    let sq = real_sqrt(&p, c.tau_neg)?;
    let w = augment_project(&sq.q);
    let r = residual(
        &w,
        lambda0,
        &GroupRingElem::new(interval_coeffs(&d)),
        &GroupRingElem::new(interval_coeffs(&d2)),
        &m,
    )?;
    let generators = g.generators().len();
    let has_involution = g.has_involution();
    let support_radius = 2 * c.radius;
    let mexp = order_unit_exponent(support_radius);
    let factor = order_unit_factor(mexp, has_involution, support_radius)?;
    let bounds = certify(lambda0, r.norm.hi(), factor, generators);
    let witness = witness_to_bytes(&w);
    let inputs = [TABLE, DELTA, LAMBDA, SDP_MATRIX]
        .iter()
        .map(|&n| (n.to_string(), inp.hash(n)))
        .collect();
    let cert = Certificate {
        group: c.group,
        generators,
        has_involution,
        radius: c.radius,
        support_radius,
        m: mexp,
        lambda0: HexFloat(lambda0),
        residual_lo: HexFloat(r.norm.lo()),
        residual_hi: HexFloat(r.norm.hi()),
        factor,
        lambda_cert: HexFloat(bounds.lambda_cert),
        kappa: bounds.kappa.map(HexFloat),
        verdict: bounds.verdict,
        witness: WitnessRef {
            file: WITNESS.into(),
            rows: w.rows,
            cols: w.cols,
            sha256: sha256_hex(&witness),
        },
        inputs,
    };
    let info = json!({
        "lambda0": lambda0,
        "residual": [r.norm.lo(), r.norm.hi()],
        "lambda_cert": bounds.lambda_cert,
        "kappa": bounds.kappa,
        "verdict": bounds.verdict,
        "sqrt_error": sq.error,
        "min_eigenvalue": sq.min_eigenvalue,
    });
    Ok(Output {
        files: vec![(WITNESS.into(), witness), (CERTIFICATE.into(), cert.to_json().into_bytes())],
        info,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecheckReport {
    pub residual_lo: HexFloat,
    pub residual_hi: HexFloat,
    pub lambda_cert: HexFloat,
    pub kappa: Option<HexFloat>,
    pub verdict: Verdict,
}

fn check_hash(name: &str, bytes: &[u8], expected: Option<&String>) -> Result<()> {
    let found = sha256_hex(bytes);
    match expected {
        Some(e) if *e == found => Ok(()),
        Some(e) => Err(Error::HashMismatch {
            path: name.into(),
            expected: e.clone(),
            found,
        }),
        None => Err(Error::RecheckFailed(format!("certificate does not pin {name}"))),
    }
}

/// Recomputes a certificate from its witness, the division table and `Δ`.
///
/// The residual is evaluated by an independent routine and must agree
/// bitwise; `λ_cert`, `κ` and the verdict are then derived again. Group
/// facts (`|S|`, involutions, support radius) are taken from the
/// certificate, after checking `|S|` against `Δ`.
pub fn recheck_certificate(cert: &Certificate, witness: &[u8], table: &[u8], delta: &[u8]) -> Result<RecheckReport> {
    check_hash(&cert.witness.file, witness, Some(&cert.witness.sha256))?;
    check_hash(TABLE, table, cert.inputs.get(TABLE))?;
    check_hash(DELTA, delta, cert.inputs.get(DELTA))?;
    let fail = |msg: String| Err(Error::RecheckFailed(msg));
    let w = witness_from_bytes(witness).map_err(Error::RecheckFailed)?;
    let m = decode_table(table, Path::new(TABLE))?;
    let (d, d2) = decode_delta(delta, Path::new(DELTA))?;
    if (w.rows, w.cols) != (cert.witness.rows, cert.witness.cols) {
        return fail("witness shape differs from the certificate".into());
    }
    if d.first() != Some(&(cert.generators as i64)) || d.iter().skip(1).filter(|&&v| v != 0).count() != cert.generators {
        return fail("Δ does not match the generator count".into());
    }
    if let Some(i) = w.column_sums().iter().position(|s| !s.contains(0.0)) {
        return fail(format!("column {i} is not in the augmentation ideal"));
    }
    if cert.m != order_unit_exponent(cert.support_radius)
        || order_unit_factor(cert.m, cert.has_involution, cert.support_radius)? != cert.factor
    {
        return fail("order unit factor is inconsistent".into());
    }
    let r = recheck_residual(&w, cert.lambda0.0, &interval_coeffs(&d), &interval_coeffs(&d2), &m)?;
    if r.norm.lo().to_bits() != cert.residual_lo.0.to_bits() || r.norm.hi().to_bits() != cert.residual_hi.0.to_bits() {
        return fail(format!("residual {:?} differs from the recorded {:?}", r.norm, cert.residual()));
    }
    let b = certify(cert.lambda0.0, r.norm.hi(), cert.factor, cert.generators);
    if b.lambda_cert.to_bits() != cert.lambda_cert.0.to_bits()
        || b.kappa.map(f64::to_bits) != cert.kappa.map(|k| k.0.to_bits())
        || b.verdict != cert.verdict
    {
        return fail("recomputed bounds differ from the certificate".into());
    }
    Ok(RecheckReport {
        residual_lo: HexFloat(r.norm.lo()),
        residual_hi: HexFloat(r.norm.hi()),
        lambda_cert: HexFloat(b.lambda_cert),
        kappa: b.kappa.map(HexFloat),
        verdict: b.verdict,
    })
}

fn recheck_stage(inp: &Inputs) -> Result<Output> {
    let cert = Certificate::from_json(&String::from_utf8_lossy(inp.get(CERTIFICATE)?))?;
    let rep = recheck_certificate(&cert, inp.get(&cert.witness.file)?, inp.get(TABLE)?, inp.get(DELTA)?)?;
    let info = serde_json::to_value(&rep)?;
    Ok(Output {
        files: vec![(RECHECK.into(), serde_json::to_vec_pretty(&rep)?)],
        info,
    })
}

fn report_stage(inp: &Inputs) -> Result<Output> {
    let cert = Certificate::from_json(&String::from_utf8_lossy(inp.get(CERTIFICATE)?))?;
    let text = cert.report();
    Ok(Output {
        info: json!({ "verdict": cert.verdict, "text": text }),
        files: vec![(REPORT.into(), text.into_bytes())],
    })
}

fn export_stage(inp: &Inputs) -> Result<Output> {
    let text = inp.get(PROBLEM)?.to_vec();
    let problem = parse_sdpa(&String::from_utf8_lossy(&text))?;
    let face = Face::new(&problem.block_sizes, &load_kernels(inp)?);
    let reduced = face.reduce(&problem);
    let info = json!({ "block_sizes": reduced.block_sizes, "constraints": reduced.constraint_count() });
    Ok(Output {
        files: vec![
            (EXPORT_PROBLEM.into(), text),
            (EXPORT_FACE.into(), format_sdpa(&reduced).into_bytes()),
        ],
        info,
    })
}
