use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator index out of range: {index} (rank {rank})")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("invalid transvection: i == j == {0}")]
    DegenerateTransvection(usize),

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("conjugate of {letter} by {sigma} is not a generator")]
    ConjugateNotInGenerators { letter: String, sigma: String },

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("ball enumeration exceeded the element budget ({limit}); {found} elements found so far")]
    MemoryBudget { limit: usize, found: usize },

    #[error("quotient x_{i}^-1 x_{j} is missing from the enclosing basis (radii too small)")]
    MissingQuotient { i: usize, j: usize },

    #[error("symmetry action is not closed on the basis: image of position {position} not found")]
    ActionNotClosed { position: usize },

    #[error("partition sizes differ: {left} vs {right}")]
    PartitionMismatch { left: usize, right: usize },

    #[error("no minimal projection table for S_{0} (only n <= 6)")]
    NoProjectionTable(usize),

    #[error("projection system invariant violated: {0}")]
    ProjectionInvariant(String),

    #[error("ambiguous numerical rank for block {label}: singular value ratio {ratio:e} inside the guard band")]
    RankAmbiguity { label: String, ratio: f64 },

    #[error("multiplicity accounting failed: sum dim*m = {got}, expected {expected}")]
    MultiplicityMismatch { got: usize, expected: usize },

    #[error("coefficient is not constant on orbit {orbit}")]
    NotOrbitConstant { orbit: usize },

    #[error("matrix is too indefinite to certify: eigenvalue {0:e}")]
    TooIndefinite(f64),

    #[error("residual support radius {support} exceeds 2^{m}")]
    SupportTooLarge { support: usize, m: u32 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("solver diverged: {0}")]
    Diverged(String),

    #[error("SDPA parse error at line {line}: {msg}")]
    SdpaParse { line: usize, msg: String },

    #[error("malformed artifact {path}: {msg}")]
    Artifact { path: PathBuf, msg: String },

    #[error("hash mismatch for {path}: manifest {expected}, found {found}")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("stage `{stage}` requires upstream stage `{missing}` to run first")]
    MissingUpstream { stage: String, missing: String },

    #[error("stage `{stage}` depends on `{upstream}`, which is out of date; rerun it first")]
    StaleUpstream { stage: String, upstream: String },

    #[error("recheck failed: {0}")]
    RecheckFailed(String),

    #[error("high-memory stage needs --big (estimated {estimate_mb} MB)")]
    NeedsBig { estimate_mb: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
