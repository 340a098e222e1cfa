use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use super::finite::FiniteGroup;

/// An element of ℚΣ: integer numerators over one positive denominator.
///
/// Always normalized (the gcd of all numerators and the denominator is 1),
/// so equality of values is equality of representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactElem {
    num: Vec<i128>,
    den: i128,
}

impl ExactElem {
    pub fn zero(order: usize) -> Self {
        Self {
            num: vec![0; order],
            den: 1,
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::basis(order, 0)
    }

    pub fn basis(order: usize, k: usize) -> Self {
        let mut a = Self::zero(order);
        a.num[k] = 1;
        a
    }

    /// `(1/den)·Σ num_k g_k`, normalized.
    pub fn from_parts(num: Vec<i128>, den: i128) -> Self {
        assert!(den != 0);
        let mut a = Self { num, den };
        a.normalize();
        a
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.den = -self.den;
            self.num.iter_mut().for_each(|x| *x = -*x);
        }
        let g = self.num.iter().fold(self.den, |g, &x| g.gcd(&x));
        if g > 1 {
            self.den /= g;
            self.num.iter_mut().for_each(|x| *x /= g);
        }
        if self.num.iter().all(|&x| x == 0) {
            self.den = 1;
        }
    }

    pub fn order(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[i128] {
        &self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        BigRational::new(BigInt::from(self.num[k]), BigInt::from(self.den))
    }

    pub fn coeff_f64(&self, k: usize) -> f64 {
        self.num[k] as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }

    /// Positions with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num.len()).filter(|&k| self.num[k] != 0).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let l = self.den.lcm(&o.den);
        let (fa, fb) = (l / self.den, l / o.den);
        let num = self.num.iter().zip(&o.num).map(|(&a, &b)| a * fa + b * fb).collect();
        Self::from_parts(num, l)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1, 1))
    }

    pub fn scale(&self, p: i128, q: i128) -> Self {
        Self::from_parts(self.num.iter().map(|&a| a * p).collect(), self.den * q)
    }

    /// `(Σ a_g g)* = Σ a_g g⁻¹`.
    pub fn star(&self, g: &FiniteGroup) -> Self {
        let mut num = vec![0; self.order()];
        for (k, &a) in self.num.iter().enumerate() {
            num[g.inverse(k)] = a;
        }
        Self { num, den: self.den }
    }

    /// Product in ℚΣ, iterating over the two supports.
    pub fn mul(&self, o: &Self, g: &FiniteGroup) -> Self {
        let order = g.order();
        assert_eq!(self.order(), order);
        let sa: Vec<usize> = self.support();
        let sb: Vec<usize> = o.support();
        let max_a = sa.iter().map(|&k| self.num[k].unsigned_abs()).max().unwrap_or(0);
        let max_b = sb.iter().map(|&k| o.num[k].unsigned_abs()).max().unwrap_or(0);
        let terms = sa.len().min(sb.len()).max(1) as u128;
        let bound = max_a.saturating_mul(max_b).saturating_mul(terms);
        let num: Vec<i128> = if bound < i64::MAX as u128 {
            let mut acc = vec![0i64; order];
            let bv: Vec<(usize, i64)> = sb.iter().map(|&k| (k, o.num[k] as i64)).collect();
            for &i in &sa {
                let ai = self.num[i] as i64;
                for &(j, bj) in &bv {
                    acc[g.mul(i, j)] += ai * bj;
                }
            }
            acc.into_iter().map(i128::from).collect()
        } else {
            let mut acc = vec![0i128; order];
            for &i in &sa {
                let ai = self.num[i];
                for &j in &sb {
                    acc[g.mul(i, j)] += ai * o.num[j];
                }
            }
            acc
        };
        Self::from_parts(num, self.den * o.den)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.order()).map(|k| self.coeff_f64(k)).collect()
    }
}
