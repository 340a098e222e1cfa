//! Second evaluation of the residual, organised by output coefficient.
//!
//! Shares no loop structure with [`super::residual`]: each `r_t` is formed
//! from the preimage list of `t` and enclosed independently. The arithmetic
//! sequence per coefficient is the same, so the two agree bitwise.

use rayon::prelude::*;

use super::{Residual, SosWitness};
use crate::groupring::DivisionTable;
use crate::interval::Interval;
use crate::{Error, Result};

pub fn recheck_residual(
    w: &SosWitness,
    lambda0: f64,
    delta: &[Interval],
    delta_sq: &[Interval],
    m: &DivisionTable,
) -> Result<Residual> {
    if w.rows != m.size() || delta.len() != m.target_len() || delta_sq.len() != m.target_len() {
        return Err(Error::Dimension("witness does not match the division table".into()));
    }
    let pre = m.preimages();
    let l = Interval::point(lambda0);
    let coeffs: Vec<Interval> = (0..pre.len())
        .into_par_iter()
        .map(|t| {
            let mut acc = delta_sq[t].sub(&l.mul(&delta[t]));
            for &(x, y) in &pre[t] {
                let (a, b) = (w.row(x as usize), w.row(y as usize));
                let mut g = Interval::point(0.0);
                for i in 0..w.cols {
                    g = g.add(&a[i].mul(&b[i]));
                }
                acc = acc.sub(&g);
            }
            acc
        })
        .collect();
    let mut norm = Interval::point(0.0);
    for c in &coeffs {
        norm = norm.add(&c.abs());
    }
    Ok(Residual { coeffs, norm })
}
