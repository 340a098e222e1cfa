use std::fmt;

use serde::{Deserialize, Serialize};

use super::characters::{cycle_type, partitions, sn_character, Partition};
use super::exact::ExactElem;
use super::finite::{FiniteGroup, SymmetryKind};
use crate::groups::SignedPermutation;
use crate::{Error, Result};

/// Name of an irreducible representation of Σ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IrrepLabel {
    Trivial,
    /// An irreducible of Sₙ.
    Sym(Partition),
    /// `ind (gᵢ ⊗ π ⊗ ψ)` with `π ⊢ i`, `ψ ⊢ n − i`.
    Wreath { i: usize, pi: Partition, psi: Partition },
}

impl IrrepLabel {
    pub fn dimension(&self) -> usize {
        match self {
            Self::Trivial => 1,
            Self::Sym(p) => p.dimension(),
            Self::Wreath { i, pi, psi } => {
                binomial(pi.size() + psi.size(), *i) * pi.dimension() * psi.dimension()
            }
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Trivial => write!(f, "trivial"),
            Self::Sym(p) => write!(f, "{p}"),
            Self::Wreath { i, pi, psi } => write!(f, "{i}:{pi}{psi}"),
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

/// Idempotents `ε_π` for the non-trivial, non-sign irreducibles of Sₙ,
/// `n ≤ 6`, in cycle notation on `1..n`: (n, partition, denominator, terms).
const EPSILON_TABLE: &[(usize, &[u8], i128, &[(i128, &str)])] = &[
    (3, &[2, 1], 2, &[(1, "()"), (1, "(1,2)")]),
    (4, &[2, 1, 1], 2, &[(1, "()"), (1, "(1,2)")]),
    (4, &[3, 1], 2, &[(1, "()"), (-1, "(1,2)")]),
    (4, &[2, 2], 2, &[(1, "()"), (1, "(1,2)")]),
    (5, &[2, 1, 1, 1], 2, &[(1, "()"), (1, "(1,2)")]),
    (5, &[3, 1, 1], 4, &[(1, "()"), (1, "(1,4,3,2)"), (1, "(1,3)(2,4)"), (1, "(1,2,3,4)")]),
    (5, &[2, 2, 1], 3, &[(1, "()"), (1, "(1,3,2)"), (1, "(1,2,3)")]),
    (5, &[4, 1], 2, &[(1, "()"), (-1, "(1,2)")]),
    (5, &[3, 2], 3, &[(1, "()"), (1, "(1,3,2)"), (1, "(1,2,3)")]),
    (6, &[2, 1, 1, 1, 1], 2, &[(1, "()"), (1, "(1,2)")]),
    (6, &[3, 1, 1, 1], 4, &[(1, "()"), (1, "(1,2)"), (1, "(1,2)(3,4)"), (1, "(3,4)")]),
    (6, &[2, 2, 1, 1], 5, &[(1, "()"), (1, "(1,3,5,2,4)"), (1, "(1,4,2,5,3)"), (1, "(1,5,4,3,2)"), (1, "(1,2,3,4,5)")]),
    (6, &[4, 1, 1], 4, &[(1, "()"), (-1, "(1,2)"), (1, "(1,2)(3,4)"), (-1, "(3,4)")]),
    (
        6,
        &[3, 2, 1],
        12,
        &[
            (1, "()"),
            (1, "(1,2)"),
            (1, "(1,2)(3,4)"),
            (1, "(3,4)"),
            (1, "(3,4,5)"),
            (1, "(1,2)(3,4,5)"),
            (1, "(1,2)(3,5)"),
            (1, "(3,5)"),
            (1, "(1,2)(4,5)"),
            (1, "(4,5)"),
            (1, "(3,5,4)"),
            (1, "(1,2)(3,5,4)"),
        ],
    ),
    (6, &[5, 1], 2, &[(1, "()"), (-1, "(1,2)")]),
    (6, &[2, 2, 2], 3, &[(1, "()"), (1, "(1,3,2)"), (1, "(1,2,3)")]),
    (6, &[4, 2], 5, &[(1, "()"), (1, "(1,3,5,2,4)"), (1, "(1,4,2,5,3)"), (1, "(1,5,4,3,2)"), (1, "(1,2,3,4,5)")]),
    (6, &[3, 3], 3, &[(1, "()"), (1, "(1,3,2)"), (1, "(1,2,3)")]),
];

/// Parses `(1,2)(3,4,5)` into an image list on `0..n`.
pub fn parse_cycles(s: &str, n: usize) -> Result<Vec<u8>> {
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let bad = || Error::Config(format!("bad cycle notation `{s}`"));
    let s = s.trim();
    if s == "()" {
        return Ok(perm);
    }
    for cycle in s.split(')').filter(|c| !c.trim().is_empty()) {
        let body = cycle.trim().strip_prefix('(').ok_or_else(bad)?;
        let pts: Vec<usize> = body
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if pts.iter().any(|&p| p == 0 || p > n) {
            return Err(bad());
        }
        for k in 0..pts.len() {
            perm[pts[k] - 1] = (pts[(k + 1) % pts.len()] - 1) as u8;
        }
    }
    Ok(perm)
}

/// The table entry `ε_π`, or `()` for the trivial and sign partitions.
pub fn epsilon(lambda: &Partition) -> Result<Vec<(i128, i128, Vec<u8>)>> {
    let n = lambda.size();
    if lambda.parts().len() <= 1 || lambda.parts().iter().all(|&p| p == 1) {
        return Ok(vec![(1, 1, (0..n as u8).collect())]);
    }
    let (_, _, den, terms) = EPSILON_TABLE
        .iter()
        .find(|(m, parts, _, _)| *m == n && *parts == lambda.parts())
        .ok_or_else(|| Error::NoProjectionTable(n))?;
    terms
        .iter()
        .map(|&(sign, c)| Ok((sign, *den, parse_cycles(c, n)?)))
        .collect()
}

/// A complete system of mutually orthogonal primitive self-adjoint idempotents.
#[derive(Clone, Debug)]
pub struct ProjectionSystem {
    pub labels: Vec<IrrepLabel>,
    pub dims: Vec<usize>,
    pub elems: Vec<ExactElem>,
}

impl ProjectionSystem {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Central projection `χ_π = (dim π / n!) Σ_g φ_π(g⁻¹) g` in ℚSₙ.
pub fn central_projection(sn: &FiniteGroup, lambda: &Partition) -> Result<ExactElem> {
    let n = sn.rank();
    let order = sn.order() as i128;
    let dim = lambda.dimension() as i128;
    let mut num = vec![0i128; sn.order()];
    for (k, g) in sn.elems().iter().enumerate() {
        // characters of Sₙ are real, so φ(g⁻¹) = φ(g)
        num[k] = dim * sn_character(lambda, &cycle_type(g.perm()))? as i128;
    }
    debug_assert_eq!(lambda.size(), n);
    Ok(ExactElem::from_parts(num, order))
}

/// `{χ_π ε_π}` for Sₙ, `n ≤ 6`, as elements of ℚSₙ.
pub fn minimal_projections_sn(n: usize) -> Result<(FiniteGroup, ProjectionSystem)> {
    if n > 6 {
        return Err(Error::NoProjectionTable(n));
    }
    let sn = FiniteGroup::new(SymmetryKind::Permutations, n.max(1))?;
    if n <= 1 {
        let sys = ProjectionSystem {
            labels: vec![IrrepLabel::Sym(Partition::new(vec![n as u8]))],
            dims: vec![1],
            elems: vec![ExactElem::identity(1)],
        };
        return Ok((sn, sys));
    }
    let mut sys = ProjectionSystem {
        labels: vec![],
        dims: vec![],
        elems: vec![],
    };
    for lambda in partitions(n) {
        let chi = central_projection(&sn, &lambda)?;
        let eps = epsilon_elem(&sn, &lambda)?;
        sys.dims.push(lambda.dimension());
        sys.elems.push(chi.mul(&eps, &sn));
        sys.labels.push(IrrepLabel::Sym(lambda));
    }
    Ok((sn, sys))
}

fn epsilon_elem(sn: &FiniteGroup, lambda: &Partition) -> Result<ExactElem> {
    let mut acc = ExactElem::zero(sn.order());
    for (sign, den, perm) in epsilon(lambda)? {
        let k = sn
            .index_of(&SignedPermutation::from_perm(perm))
            .expect("permutation in Sₙ");
        acc = acc.add(&ExactElem::basis(sn.order(), k).scale(sign, den));
    }
    Ok(acc)
}

/// `φ_π(ε_π)`, which the table guarantees to be 1.
pub fn epsilon_character_value(lambda: &Partition) -> Result<(i128, i128)> {
    let mut num = 0i128;
    let mut den = 1i128;
    for (sign, d, perm) in epsilon(lambda)? {
        den = d;
        num += sign * sn_character(lambda, &cycle_type(&perm))? as i128;
    }
    Ok((num, den))
}

/// Pushes an element of ℚS_k into ℚΣ acting on coordinates `offset..offset+k`.
fn embed(sk: &FiniteGroup, a: &ExactElem, sigma: &FiniteGroup, offset: usize) -> ExactElem {
    let n = sigma.rank();
    // S₀ is represented by S₁, so clip to the coordinates that exist
    let k = sk.rank().min(n - offset);
    let mut num = vec![0i128; sigma.order()];
    for (idx, &c) in a.numerators().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut perm: Vec<u8> = (0..n as u8).collect();
        for (x, &y) in sk.elem(idx).perm().iter().enumerate().take(k) {
            perm[offset + x] = (offset + y as usize) as u8;
        }
        let target = sigma
            .index_of(&SignedPermutation::from_perm(perm))
            .expect("embedded permutation in Σ");
        num[target] = c;
    }
    ExactElem::from_parts(num, a.denominator())
}

/// `χᵢ = 2⁻ⁿ Σ_x gᵢ(x) x`, with `gᵢ` equal to −1 on the first `i` sign flips.
fn sign_character_projection(sigma: &FiniteGroup, i: usize) -> ExactElem {
    let n = sigma.rank();
    let mut num = vec![0i128; sigma.order()];
    for mask in 0u32..(1 << n) {
        let signs: Vec<i8> = (0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
        let flips_in_head = (0..i).filter(|&k| mask >> k & 1 == 1).count();
        let value = if flips_in_head % 2 == 0 { 1 } else { -1 };
        let x = SignedPermutation::new((0..n as u8).collect(), signs);
        num[sigma.index_of(&x).expect("sign flip in Σ")] = value;
    }
    ExactElem::from_parts(num, 1 << n)
}

/// A minimal projection system for the given Σ.
pub fn minimal_projections(sigma: &FiniteGroup) -> Result<ProjectionSystem> {
    let n = sigma.rank();
    match sigma.kind() {
        SymmetryKind::Trivial => Ok(ProjectionSystem {
            labels: vec![IrrepLabel::Trivial],
            dims: vec![1],
            elems: vec![ExactElem::identity(1)],
        }),
        SymmetryKind::Permutations => {
            let (sn, sys) = minimal_projections_sn(n)?;
            let elems = sys.elems.iter().map(|p| embed(&sn, p, sigma, 0)).collect();
            Ok(ProjectionSystem { elems, ..sys })
        }
        SymmetryKind::Signed => minimal_projections_wreath(sigma),
    }
}

/// `{χᵢ p_π p_ψ}` for ℤ/2 ≀ Sₙ, `π ⊢ i` on the first `i` indices, `ψ ⊢ n − i` on the rest.
pub fn minimal_projections_wreath(sigma: &FiniteGroup) -> Result<ProjectionSystem> {
    if sigma.kind() != SymmetryKind::Signed {
        return Err(Error::Unsupported("wreath projections need the signed group".into()));
    }
    let n = sigma.rank();
    let systems: Vec<(FiniteGroup, ProjectionSystem)> =
        (0..=n).map(minimal_projections_sn).collect::<Result<_>>()?;
    let mut out = ProjectionSystem {
        labels: vec![],
        dims: vec![],
        elems: vec![],
    };
    for i in 0..=n {
        let chi = sign_character_projection(sigma, i);
        let (head_group, head) = &systems[i];
        let (tail_group, tail) = &systems[n - i];
        for (pi, p) in head.labels.iter().zip(&head.elems) {
            let p = embed(head_group, p, sigma, 0);
            let cp = chi.mul(&p, sigma);
            for (psi, q) in tail.labels.iter().zip(&tail.elems) {
                let q = embed(tail_group, q, sigma, i);
                let (IrrepLabel::Sym(pi), IrrepLabel::Sym(psi)) = (pi, psi) else {
                    unreachable!()
                };
                let label = IrrepLabel::Wreath {
                    i,
                    pi: pi.clone(),
                    psi: psi.clone(),
                };
                out.dims.push(label.dimension());
                out.labels.push(label);
                out.elems.push(cp.mul(&q, sigma));
            }
        }
    }
    Ok(out)
}

/// Checks, in exact arithmetic, that `sys` is a minimal projection system.
///
/// Each `p` must satisfy `p* = p`, `p² = p`, `p_e = dim/|Σ|` (so `p` is a
/// rank-one idempotent in exactly one irreducible), and `p_a p_b = 0` for
/// `a ≠ b`. The number of members must equal the number of conjugacy classes.
pub fn verify_projection_system(sigma: &FiniteGroup, sys: &ProjectionSystem) -> Result<()> {
    let order = sigma.order() as i128;
    let fail = |msg: String| Err(Error::ProjectionInvariant(msg));
    if sys.len() != sigma.class_count() {
        return fail(format!("{} projections for {} classes", sys.len(), sigma.class_count()));
    }
    let dim_sq: usize = sys.dims.iter().map(|d| d * d).sum();
    if dim_sq != sigma.order() {
        return fail(format!("Σ dim² = {dim_sq} != |Σ| = {order}"));
    }
    for (label, (p, &dim)) in sys.labels.iter().zip(sys.elems.iter().zip(&sys.dims)) {
        if p.star(sigma) != *p {
            return fail(format!("{label}: p* != p"));
        }
        if p.mul(p, sigma) != *p {
            return fail(format!("{label}: p² != p"));
        }
        if p.numerators()[0] * order != dim as i128 * p.denominator() {
            return fail(format!("{label}: identity coefficient is not dim/|Σ|"));
        }
    }
    for a in 0..sys.len() {
        for b in a + 1..sys.len() {
            // p_b p_a = (p_a p_b)*, so one order suffices
            if !sys.elems[a].mul(&sys.elems[b], sigma).is_zero() {
                return fail(format!("{} · {} != 0", sys.labels[a], sys.labels[b]));
            }
        }
    }
    Ok(())
}
