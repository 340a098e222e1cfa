//! From a floating point solution to a rigorous bound.
//!
//! `P ≈ QQᵀ` is factored, the columns of `Q` are moved into the
//! augmentation ideal with interval arithmetic, and the ℓ₁ norm of
//! `r = Δ² − λ₀Δ − Σ ξᵢ*ξᵢ` is enclosed. For `r` supported on `B_{2^m}`,
//! `r + R·Δ ⪰ 0` once `R ≥ 2^{2m−1}‖r‖₁` (`2^{2m−2}` without involutions),
//! hence `Δ² − (λ₀ − R)Δ ⪰ 0`.

mod recheck;
mod witness;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use recheck::recheck_residual;
pub use witness::{read_witness, write_witness, witness_from_bytes, witness_to_bytes};

use crate::groupring::{DivisionTable, GroupRingElem};
use crate::groups::GroupDescriptor;
use crate::interval::{self, parse_hex_float, to_hex_float, Interval};
use crate::linalg::sym_eigen;
use crate::{Error, Result};

/// Default tolerance for negative eigenvalues of `P`.
pub const TAU_NEG: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SquareRoot {
    pub q: DMatrix<f64>,
    pub min_eigenvalue: f64,
    /// Sum of the clamped negative eigenvalues' magnitudes.
    pub clamped_mass: f64,
    /// `‖QQᵀ − P‖_max`.
    pub error: f64,
}

/// `Q = V·diag(√max(w, 0))·Vᵀ`; errors when some eigenvalue is below `−τ`.
pub fn real_sqrt(p: &DMatrix<f64>, tau_neg: f64) -> Result<SquareRoot> {
    let sym = (p + p.transpose()) * 0.5;
    let (w, v) = sym_eigen(&sym);
    let min_eigenvalue = w.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -tau_neg {
        return Err(Error::TooIndefinite(min_eigenvalue));
    }
    let clamped_mass = w.iter().filter(|&&e| e < 0.0).map(|e| -e).sum();
    let roots = w.map(|e| e.max(0.0).sqrt());
    let q = &v * DMatrix::from_diagonal(&roots) * v.transpose();
    let error = (&q * q.transpose() - &sym).amax();
    Ok(SquareRoot {
        q,
        min_eigenvalue: if w.is_empty() { 0.0 } else { min_eigenvalue },
        clamped_mass,
        error,
    })
}

/// Interval matrix `Q̄` whose columns `ξᵢ` lie in the augmentation ideal.
///
/// Stored row-major: `entries[x·cols + i]` is `ξᵢ(𝐱ₓ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SosWitness {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Interval>,
}

impl SosWitness {
    pub fn get(&self, x: usize, i: usize) -> Interval {
        self.entries[x * self.cols + i]
    }

    pub fn row(&self, x: usize) -> &[Interval] {
        &self.entries[x * self.cols..(x + 1) * self.cols]
    }

    /// Interval sum of each column, left to right.
    pub fn column_sums(&self) -> Vec<Interval> {
        (0..self.cols)
            .map(|i| Interval::sum((0..self.rows).map(|x| &self.entries[x * self.cols + i])))
            .collect()
    }

    /// Every entry widened by `ulps` units in the last place on each side.
    pub fn widened(&self, ulps: u32) -> SosWitness {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let (mut lo, mut hi) = (e.lo(), e.hi());
                for _ in 0..ulps {
                    lo = lo.next_down();
                    hi = hi.next_up();
                }
                Interval::new(lo, hi)
            })
            .collect();
        SosWitness { entries, ..*self }
    }
}

/// Widens every entry by one ulp, then subtracts the interval column mean.
pub fn augment_project(q: &DMatrix<f64>) -> SosWitness {
    let (rows, cols) = q.shape();
    let n = Interval::point(rows as f64);
    let mut entries = vec![Interval::point(0.0); rows * cols];
    for i in 0..cols {
        let col: Vec<Interval> = (0..rows).map(|x| Interval::widen_ulp(q[(x, i)])).collect();
        let mean = if rows == 0 { Interval::point(0.0) } else { Interval::sum(&col).div(&n) };
        for (x, c) in col.iter().enumerate() {
            entries[x * cols + i] = c.sub(&mean);
        }
    }
    SosWitness { rows, cols, entries }
}

/// `Σᵢ a[i]·b[i]`, accumulated left to right.
pub(crate) fn interval_dot(a: &[Interval], b: &[Interval]) -> Interval {
    a.iter()
        .zip(b)
        .fold(Interval::point(0.0), |acc, (x, y)| acc.add(&x.mul(y)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    /// Enclosures of `r_t` for `t ∈ E⁻¹E`.
    pub coeffs: Vec<Interval>,
    pub norm: Interval,
}

/// `Δ²_t − λ₀Δ_t` as intervals, the starting value of every residual coefficient.
pub(crate) fn residual_start(lambda0: f64, delta: &[Interval], delta_sq: &[Interval]) -> Vec<Interval> {
    let l = Interval::point(lambda0);
    delta_sq
        .iter()
        .zip(delta)
        .map(|(d2, d)| d2.sub(&l.mul(d)))
        .collect()
}

/// Encloses `r = Δ² − λ₀Δ − Σᵢ ξᵢ*ξᵢ` and `‖r‖₁`.
///
/// `(ξ*ξ)_t` collects `Σᵢ ξᵢ(x)ξᵢ(y)` over `M[x, y] = t`, subtracted in
/// row-major `(x, y)` order; the norm sums `|r_t|` in index order. The
/// order is fixed so that [`recheck_residual`] reproduces the result bitwise.
pub fn residual(
    w: &SosWitness,
    lambda0: f64,
    delta: &GroupRingElem<Interval>,
    delta_sq: &GroupRingElem<Interval>,
    m: &DivisionTable,
) -> Result<Residual> {
    let n = m.size();
    if w.rows != n || delta.len() != m.target_len() || delta_sq.len() != m.target_len() {
        return Err(Error::Dimension(format!(
            "witness {}x{}, table {n} -> {}, Δ {} / Δ² {}",
            w.rows,
            w.cols,
            m.target_len(),
            delta.len(),
            delta_sq.len()
        )));
    }
    let mut r = residual_start(lambda0, delta.coeffs(), delta_sq.coeffs());
    const CHUNK: usize = 128;
    for start in (0..n).step_by(CHUNK) {
        let rows: Vec<Vec<Interval>> = (start..(start + CHUNK).min(n))
            .into_par_iter()
            .map(|x| (0..n).map(|y| interval_dot(w.row(x), w.row(y))).collect())
            .collect();
        for (k, g) in rows.iter().enumerate() {
            for (y, &t) in m.row(start + k).iter().enumerate() {
                r[t as usize] = r[t as usize].sub(&g[y]);
            }
        }
    }
    let norm = Interval::sum(r.iter().map(|c| c.abs()).collect::<Vec<_>>().iter());
    Ok(Residual { coeffs: r, norm })
}

/// Smallest `m ≥ 1` with `support_radius ≤ 2^m`.
pub fn order_unit_exponent(support_radius: usize) -> u32 {
    let mut m = 1;
    while (1usize << m) < support_radius {
        m += 1;
    }
    m
}

/// `2^{2m−1}`, or `2^{2m−2}` when the generating set has no involution.
///
/// Fails unless the residual support fits in `B_{2^m}`.
pub fn order_unit_factor(m: u32, has_involution: bool, support_radius: usize) -> Result<u64> {
    if m == 0 || m > 16 || support_radius > (1usize << m) {
        return Err(Error::SupportTooLarge {
            support: support_radius,
            m,
        });
    }
    Ok(if has_involution { 1 << (2 * m - 1) } else { 1 << (2 * m - 2) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => write!(f, "certified"),
            Verdict::Inconclusive => write!(f, "inconclusive (not a disproof)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lambda_cert: f64,
    /// Present only for a positive certificate.
    pub kappa: Option<f64>,
    pub verdict: Verdict,
}

/// `λ_cert = λ₀ − factor·r_up` and `κ = √(2λ_cert/|S|)`, both rounded down.
pub fn certify(lambda0: f64, r_up: f64, factor: u64, generators: usize) -> Bounds {
    let shift = interval::mul_up(factor as f64, r_up);
    let lambda_cert = interval::add_down(lambda0, -shift);
    if lambda_cert > 0.0 && lambda_cert.is_finite() {
        let ratio = interval::div_down(interval::mul_down(2.0, lambda_cert), generators as f64);
        let kappa = Interval::new(ratio, ratio).sqrt().lo();
        Bounds {
            lambda_cert,
            kappa: Some(kappa),
            verdict: Verdict::Certified,
        }
    } else {
        Bounds {
            lambda_cert,
            kappa: None,
            verdict: Verdict::Inconclusive,
        }
    }
}

/// A binary64 written as a hexadecimal literal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HexFloat(pub f64);

impl Serialize for HexFloat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_hex_float(self.0))
    }
}

impl<'de> Deserialize<'de> for HexFloat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_hex_float(&s)
            .map(HexFloat)
            .ok_or_else(|| serde::de::Error::custom(format!("bad hex float {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRef {
    pub file: String,
    pub rows: usize,
    pub cols: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub group: GroupDescriptor,
    pub generators: usize,
    pub has_involution: bool,
    /// Radius of E and of the residual support E⁻¹E.
    pub radius: usize,
    pub support_radius: usize,
    pub m: u32,
    pub lambda0: HexFloat,
    pub residual_lo: HexFloat,
    pub residual_hi: HexFloat,
    pub factor: u64,
    pub lambda_cert: HexFloat,
    pub kappa: Option<HexFloat>,
    pub verdict: Verdict,
    pub witness: WitnessRef,
    /// sha256 of every input artifact, by name.
    pub inputs: BTreeMap<String, String>,
}

impl Certificate {
    pub fn residual(&self) -> Interval {
        Interval::new(self.residual_lo.0, self.residual_hi.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Certificate = serde_json::from_str(s)?;
        if c.residual_lo.0 > c.residual_hi.0 {
            return Err(Error::Config("certificate residual interval is reversed".into()));
        }
        Ok(c)
    }

    /// Human-readable summary.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let r = self.residual();
        s.push_str(&format!("group        {} (|S| = {})\n", self.group, self.generators));
        s.push_str(&format!("support      E = B_{}, residual on B_{} (m = {})\n", self.radius, self.support_radius, self.m));
        s.push_str(&format!("λ₀           {}\n", self.lambda0.0));
        s.push_str(&format!("‖r‖₁         [{:e}, {:e}]\n", r.lo(), r.hi()));
        s.push_str(&format!("order unit   {}\n", self.factor));
        s.push_str(&format!("λ_cert       {:.10}\n", self.lambda_cert.0));
        match self.kappa {
            Some(k) => s.push_str(&format!(
                "verdict      {}: λ > {}, κ > {}\n",
                self.verdict,
                floor_digits(self.lambda_cert.0, 4),
                floor_digits(k.0, 5)
            )),
            None => s.push_str(&format!("verdict      {}\n", self.verdict)),
        }
        s
    }
}

/// `x` truncated (toward −∞) to `digits` decimals, as written.
pub fn floor_digits(x: f64, digits: usize) -> String {
    let text = format!("{:.*}", digits + 6, x);
    let cut = text.find('.').map_or(text.len(), |p| p + 1 + digits);
    let mut out = text[..cut.min(text.len())].to_string();
    // rounding by the formatter may have carried upward
    if out.parse::<f64>().unwrap_or(f64::INFINITY) > x {
        let step = 10f64.powi(-(digits as i32));
        out = format!("{:.*}", digits, out.parse::<f64>().unwrap() - step);
    }
    out
}
