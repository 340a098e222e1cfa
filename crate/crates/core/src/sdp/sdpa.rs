//! SDPA sparse (`.dat-s`) files.
//!
//! SDPA solves `max ⟨F₀, Y⟩` s.t. `⟨Fᵢ, Y⟩ = cᵢ`, `Y ⪰ 0`. The free λ is
//! split as `λ⁺ − λ⁻` on a trailing diagonal block of size 2, so
//! `Y = diag(P_1, …, P_k, λ⁺, λ⁻)` and `F₀` is `diag(1, −1)` on that block.
//! Floats are written in shortest round-trip form, so parsing a written file
//! gives back the identical problem.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Constraint, SdpProblem};
use crate::{Error, Result};

pub fn format_sdpa(p: &SdpProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "\"max lambda; last block is diag(lambda+, lambda-)");
    if p.block_sizes.is_empty() && p.constraints.is_empty() {
        s.push_str("0\n0\n\n\n");
        return s;
    }
    let nblocks = p.block_sizes.len() + 1;
    let _ = writeln!(s, "{}", p.constraints.len());
    let _ = writeln!(s, "{nblocks}");
    let sizes: Vec<String> = p
        .block_sizes
        .iter()
        .map(|m| m.to_string())
        .chain(std::iter::once("-2".to_string()))
        .collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.constraints.iter().map(|c| format!("{:e}", c.rhs)).collect();
    let _ = writeln!(s, "{}", rhs.join(" "));
    let lb = nblocks;
    let _ = writeln!(s, "0 {lb} 1 1 1e0");
    let _ = writeln!(s, "0 {lb} 2 2 -1e0");
    for (t, c) in p.constraints.iter().enumerate() {
        let k = t + 1;
        for &(b, i, j, v) in &c.entries {
            let _ = writeln!(s, "{k} {} {} {} {v:e}", b + 1, i + 1, j + 1);
        }
        if c.lambda_coeff != 0.0 {
            let d = c.lambda_coeff;
            let _ = writeln!(s, "{k} {lb} 1 1 {d:e}");
            let _ = writeln!(s, "{k} {lb} 2 2 {:e}", -d);
        }
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::SdpaParse {
        line,
        msg: msg.into(),
    }
}

fn header_tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || "{}(),".contains(c))
        .filter(|t| !t.is_empty())
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| perr(line, format!("bad number {tok:?}")))
}

/// Reads files in the layout [`format_sdpa`] writes.
///
/// Accepts the usual header punctuation; the last block must be the
/// `-2` λ block with `F₀ = diag(1, −1)`.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));

    let mut next = |what: &str| lines.next().ok_or_else(|| perr(0, format!("missing {what}")));

    let (ln, l) = next("constraint count")?;
    let m: usize = num(header_tokens(l).next().ok_or_else(|| perr(ln, "empty"))?, ln)?;
    let (ln, l) = next("block count")?;
    let nblocks: usize = num(header_tokens(l).next().ok_or_else(|| perr(ln, "empty"))?, ln)?;
    if m == 0 && nblocks == 0 {
        return Ok(SdpProblem {
            block_sizes: Vec::new(),
            constraints: Vec::new(),
        });
    }
    let (ln, l) = next("block structure")?;
    let sizes: Vec<i64> = header_tokens(l)
        .take(nblocks)
        .map(|t| num(t, ln))
        .collect::<Result<_>>()?;
    if sizes.len() != nblocks || nblocks == 0 || *sizes.last().unwrap() != -2 {
        return Err(perr(ln, "expected PSD blocks followed by a -2 block"));
    }
    let block_sizes: Vec<usize> = sizes[..nblocks - 1]
        .iter()
        .map(|&s| {
            if s > 0 {
                Ok(s as usize)
            } else {
                Err(perr(ln, "only the last block may be diagonal"))
            }
        })
        .collect::<Result<_>>()?;
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    while rhs.len() < m {
        let (ln, l) = next("objective vector")?;
        for t in header_tokens(l) {
            rhs.push(num(t, ln)?);
        }
    }
    if rhs.len() != m {
        return Err(perr(0, "objective vector has the wrong length"));
    }
    let mut constraints: Vec<Constraint> = rhs
        .into_iter()
        .map(|rhs| Constraint {
            entries: Vec::new(),
            lambda_coeff: 0.0,
            rhs,
        })
        .collect();
    let mut lambda2: Vec<Option<f64>> = vec![None; m];
    let (mut f0_11, mut f0_22) = (0.0, 0.0);
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(perr(ln, "expected `mat block i j value`"));
        }
        let k: usize = num(toks[0], ln)?;
        let b: usize = num(toks[1], ln)?;
        let i: usize = num(toks[2], ln)?;
        let j: usize = num(toks[3], ln)?;
        let v: f64 = num(toks[4], ln)?;
        if k > m || b == 0 || b > nblocks || i == 0 || j == 0 {
            return Err(perr(ln, "index out of range"));
        }
        let (i, j) = (i.min(j), i.max(j));
        if b == nblocks {
            if i != j || i > 2 {
                return Err(perr(ln, "bad entry in the lambda block"));
            }
            match (k, i) {
                (0, 1) => f0_11 = v,
                (0, _) => f0_22 = v,
                (k, 1) => constraints[k - 1].lambda_coeff = v,
                (k, _) => lambda2[k - 1] = Some(v),
            }
            continue;
        }
        if k == 0 {
            if v != 0.0 {
                return Err(perr(ln, "objective may only involve lambda"));
            }
            continue;
        }
        if j > block_sizes[b - 1] {
            return Err(perr(ln, "index exceeds block size"));
        }
        constraints[k - 1]
            .entries
            .push(((b - 1) as u32, (i - 1) as u32, (j - 1) as u32, v));
    }
    if f0_11 != 1.0 || f0_22 != -1.0 {
        return Err(perr(0, "objective must be lambda+ - lambda-"));
    }
    for (t, c) in constraints.iter_mut().enumerate() {
        if lambda2[t].unwrap_or(0.0) != -c.lambda_coeff {
            return Err(perr(0, format!("constraint {} splits lambda unevenly", t + 1)));
        }
        c.entries.sort_by_key(|&(b, i, j, _)| (b, i, j));
    }
    Ok(SdpProblem {
        block_sizes,
        constraints,
    })
}

pub fn write_sdpa(p: &SdpProblem, path: &Path) -> Result<()> {
    fs::write(path, format_sdpa(p)).map_err(|e| Error::Artifact {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn read_sdpa(path: &Path) -> Result<SdpProblem> {
    let text = fs::read_to_string(path).map_err(|e| Error::Artifact {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    parse_sdpa(&text)
}
