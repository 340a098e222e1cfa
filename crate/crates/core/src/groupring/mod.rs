//! Balls in Cayley graphs, the division table, and group-ring arithmetic.
//!
//! Elements are dense coefficient vectors over an ordered basis. Once the
//! division table is known no group element is touched again: `a*·b` only
//! reads `M[i, j]`.

mod basis;
mod table;

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use basis::{ball, ball_with_limit, Basis, ROOT};
pub use table::{division_table, DivisionTable};

use crate::interval::Interval;

/// Coefficient field for [`GroupRingElem`].
pub trait Scalar: Clone + Send + Sync + fmt::Debug {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn plus(&self, o: &Self) -> Self {
        self.checked_add(*o).expect("i64 overflow")
    }
    fn minus(&self, o: &Self) -> Self {
        self.checked_sub(*o).expect("i64 overflow")
    }
    fn times(&self, o: &Self) -> Self {
        self.checked_mul(*o).expect("i64 overflow")
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for Interval {
    fn zero() -> Self {
        Interval::point(0.0)
    }
    fn from_i64(v: i64) -> Self {
        Interval::from_i64(v)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn is_zero(&self) -> bool {
        self.lo() == 0.0 && self.hi() == 0.0
    }
}

/// `Σ ξ_g g` as coefficients over the positions of some basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRingElem<C> {
    coeffs: Vec<C>,
}

impl<C: Scalar> GroupRingElem<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            coeffs: vec![C::zero(); len],
        }
    }

    /// The basis element at position `k`.
    pub fn delta(len: usize, k: usize) -> Self {
        let mut a = Self::zeros(len);
        a.coeffs[k] = C::from_i64(1);
        a
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn get(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    /// Coefficient-wise map into another scalar type.
    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> GroupRingElem<D> {
        GroupRingElem::new(self.coeffs.iter().map(f).collect())
    }

    /// Zero-pads to a larger basis of which the current one is a prefix.
    pub fn extend_to(&self, len: usize) -> Self {
        assert!(len >= self.len());
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, C::zero());
        Self { coeffs }
    }

    pub fn plus(&self, o: &Self) -> Self {
        assert_eq!(self.len(), o.len());
        Self::new(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.plus(b)).collect())
    }

    pub fn minus(&self, o: &Self) -> Self {
        assert_eq!(self.len(), o.len());
        Self::new(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.minus(b)).collect())
    }

    pub fn scale(&self, k: &C) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.times(k)).collect())
    }
}

/// `(ξ*)_g = ξ_{g⁻¹}`, given `inv[k]` = position of `𝐱ₖ⁻¹`.
pub fn star<C: Scalar>(a: &GroupRingElem<C>, inv: &[u32]) -> GroupRingElem<C> {
    assert_eq!(a.len(), inv.len());
    let mut out = vec![C::zero(); a.len()];
    for (k, c) in a.coeffs.iter().enumerate() {
        out[inv[k] as usize] = c.clone();
    }
    GroupRingElem::new(out)
}

/// `a*·b` for `a, b` supported on E, as an element over E⁻¹E.
///
/// Coefficients are accumulated in row-major `(i, j)` order.
pub fn twisted_mul<C: Scalar>(
    a: &GroupRingElem<C>,
    b: &GroupRingElem<C>,
    m: &DivisionTable,
) -> GroupRingElem<C> {
    let n = m.size();
    assert!(a.len() >= n && b.len() >= n);
    let mut out = vec![C::zero(); m.target_len()];
    for i in 0..n {
        let ai = &a.coeffs[i];
        if ai.is_zero() {
            continue;
        }
        for (j, &k) in m.row(i).iter().enumerate() {
            let bj = &b.coeffs[j];
            if bj.is_zero() {
                continue;
            }
            out[k as usize] = out[k as usize].plus(&ai.times(bj));
        }
    }
    GroupRingElem::new(out)
}

/// `Δ = |S| − Σ s` over a basis of length `len` whose positions `1..=s` are S.
pub fn laplacian<C: Scalar>(len: usize, s: usize) -> GroupRingElem<C> {
    assert!(len > s, "basis must contain e and S");
    let mut coeffs = vec![C::zero(); len];
    coeffs[0] = C::from_i64(s as i64);
    for c in &mut coeffs[1..=s] {
        *c = C::from_i64(-1);
    }
    GroupRingElem::new(coeffs)
}

pub fn augmentation<C: Scalar>(a: &GroupRingElem<C>) -> C {
    a.coeffs.iter().fold(C::zero(), |acc, c| acc.plus(c))
}

/// Enclosure of `Σ |ξ_g|`, summed left to right.
pub fn l1_norm(a: &GroupRingElem<Interval>) -> Interval {
    a.coeffs
        .iter()
        .fold(Interval::point(0.0), |acc, c| acc.add(&c.abs()))
}

pub fn l1_norm_exact(a: &GroupRingElem<BigRational>) -> BigRational {
    a.coeffs.iter().fold(<BigRational as Zero>::zero(), |acc, c| acc + c.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupContext, SAut, SpecialLinear, SymmetricGroup};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// `(ξη)_g = Σ_h ξ_h η_{h⁻¹g}` with explicit group multiplication.
    fn convolve<G: GroupContext>(
        ctx: &G,
        e2: &Basis<G::Elem>,
        x: &[BigRational],
        y: &[BigRational],
    ) -> Vec<BigRational> {
        let mut out = vec![<BigRational as Zero>::zero(); e2.len()];
        for (h, xh) in x.iter().enumerate() {
            for (k, yk) in y.iter().enumerate() {
                if Zero::is_zero(xh) || Zero::is_zero(yk) {
                    continue;
                }
                let g = ctx.mul(e2.elem(h), e2.elem(k));
                out[e2.position(ctx, &g).unwrap()] += xh * yk;
            }
        }
        out
    }

    fn random_elem(rng: &mut impl Rng, len: usize, support: usize) -> GroupRingElem<BigRational> {
        let mut c = vec![<BigRational as Zero>::zero(); len];
        for _ in 0..support {
            let k = rng.gen_range(0..len);
            c[k] = BigRational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into());
        }
        GroupRingElem::new(c)
    }

    fn check_against_convolution<G: GroupContext>(ctx: &G, seed: u64) {
        let e4 = ball(ctx, 4).unwrap();
        let e = e4.prefix(2);
        let m = division_table(ctx, &e, &e4).unwrap();
        let inv = e.inverse_positions(ctx).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let a = random_elem(&mut rng, e.len(), 6);
            let b = random_elem(&mut rng, e.len(), 6);
            let lhs = twisted_mul(&a, &b, &m);
            let a_star = star(&a, &inv).extend_to(e4.len());
            let rhs = convolve(ctx, &e4, a_star.coeffs(), b.extend_to(e4.len()).coeffs());
            assert_eq!(lhs.coeffs(), &rhs[..]);
            assert_eq!(augmentation(&lhs), augmentation(&a) * augmentation(&b));
        }
    }

    #[test]
    fn twisted_mul_matches_convolution_on_saut2_and_sl2() {
        check_against_convolution(&SAut::new(2).unwrap(), 1);
        check_against_convolution(&SpecialLinear::new(2).unwrap(), 2);
    }

    #[test]
    fn laplacian_square_at_identity() {
        // |S| = 80: the identity coefficient of Δ*Δ is |S|² + |S|
        let g = SAut::new(5).unwrap();
        let e = ball(&g, 1).unwrap();
        let s = g.generators().len();
        assert_eq!(s, 80);
        let m = division_table(&g, &e, &ball(&g, 2).unwrap()).unwrap();
        let d: GroupRingElem<i64> = laplacian(e.len(), s);
        assert_eq!(*d.get(0), 80);
        assert!(d.coeffs()[1..].iter().all(|&c| c == -1));
        let inv = e.inverse_positions(&g).unwrap();
        assert_eq!(star(&d, &inv), d);
        let d2 = twisted_mul(&d, &d, &m);
        assert_eq!(*d2.get(0), 6480);
        assert_eq!(augmentation(&d), 0);
        assert_eq!(augmentation(&d2), 0);
        let di = d.map(|&c| Interval::from_i64(c));
        assert_eq!(l1_norm(&di), Interval::point(160.0));
    }

    #[test]
    fn star_and_delta_basics() {
        let g = SymmetricGroup::new(3).unwrap();
        let e = ball(&g, 2).unwrap();
        let inv = e.inverse_positions(&g).unwrap();
        let m = division_table(&g, &e, &e).unwrap();
        for k in 0..e.len() {
            let dk = GroupRingElem::<i64>::delta(e.len(), k);
            assert_eq!(star(&dk, &inv), GroupRingElem::delta(e.len(), inv[k] as usize));
            assert_eq!(twisted_mul(&dk, &dk, &m), GroupRingElem::delta(e.len(), 0));
        }
        assert_eq!(augmentation(&GroupRingElem::<i64>::delta(6, 0)), 1);
        assert_eq!(l1_norm(&GroupRingElem::zeros(6)), Interval::point(0.0));
    }

    #[test]
    fn interval_product_contains_rational_product() {
        let g = SAut::new(2).unwrap();
        let e4 = ball(&g, 4).unwrap();
        let e = e4.prefix(2);
        let m = division_table(&g, &e, &e4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let mut ai = Vec::new();
            let mut aq = Vec::new();
            for _ in 0..e.len() {
                let x: f64 = rng.gen_range(-1.0..1.0);
                let w = Interval::widen_ulp(x);
                ai.push(w);
                // any rational selection from [x⁻, x⁺]; take the upper end
                aq.push(BigRational::from_float(w.hi()).unwrap());
            }
            let (ai, aq) = (GroupRingElem::new(ai), GroupRingElem::new(aq));
            let pi = twisted_mul(&ai, &ai, &m);
            let pq = twisted_mul(&aq, &aq, &m);
            for (i, r) in pi.coeffs().iter().zip(pq.coeffs()) {
                assert!(BigRational::from_float(i.lo()).unwrap() <= *r);
                assert!(*r <= BigRational::from_float(i.hi()).unwrap());
            }
            let n = l1_norm(&pi);
            assert!(BigRational::from_float(n.hi()).unwrap() >= l1_norm_exact(&pq));
        }
    }

    proptest! {
        #[test]
        fn star_is_an_involution(coeffs in proptest::collection::vec(-50i64..50, 13)) {
            let z = crate::groups::FreeAbelian::new(2).unwrap();
            let e = ball(&z, 2).unwrap();
            let inv = e.inverse_positions(&z).unwrap();
            let a = GroupRingElem::new(coeffs);
            prop_assert_eq!(star(&star(&a, &inv), &inv), a);
        }
    }
}
