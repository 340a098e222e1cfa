//! Closed intervals of binary64 numbers with outward rounding.
//!
//! Each primitive rounds its lower endpoint down and its upper endpoint up.
//! The direction is decided from the exact rounding error (TwoSum / FMA
//! residual), and the endpoint moves to the adjacent representable value
//! only when the nearest-rounded result is on the wrong side. No global
//! rounding mode is touched, so intervals are safe to use from any thread.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Below this magnitude an FMA residual may not be exact; round blindly.
const TINY: f64 = 1.0e-290;

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::INFINITY && a.is_finite() && b.is_finite() {
            f64::MAX
        } else {
            s
        };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    -add_down(-a, -b)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p == f64::INFINITY && a.is_finite() && b.is_finite() {
            f64::MAX
        } else {
            p
        };
    }
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    let err = a.mul_add(b, -p);
    if err < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    -mul_down(-a, b)
}

pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || a == 0.0 {
        return q;
    }
    if q.abs() < TINY || b.abs() < TINY || a.abs() < TINY {
        return q.next_down();
    }
    // a - q*b exactly; the true quotient is q + r/b
    let r = (-q).mul_add(b, a);
    if (r < 0.0) != (b < 0.0) && r != 0.0 {
        q.next_down()
    } else {
        q
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    -div_down(-a, b)
}

pub fn sqrt_down(x: f64) -> f64 {
    let s = x.sqrt();
    if !s.is_finite() || s == 0.0 {
        return s;
    }
    if x < TINY {
        return s.next_down().max(0.0);
    }
    let r = (-s).mul_add(s, x);
    if r < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn sqrt_up(x: f64) -> f64 {
    let s = x.sqrt();
    if !s.is_finite() {
        return s;
    }
    if x < TINY {
        return s.next_up();
    }
    let r = (-s).mul_add(s, x);
    if r > 0.0 {
        s.next_up()
    } else {
        s
    }
}

impl Interval {
    /// Panics unless `lo <= hi` (NaN endpoints are rejected too).
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// Smallest interval holding the integer `v`.
    pub fn from_i64(v: i64) -> Self {
        let x = v as f64;
        if x as i128 == v as i128 {
            Self::point(x)
        } else {
            Self::new(x.next_down(), x.next_up())
        }
    }

    /// `[x⁻, x⁺]`: one unit in the last place on each side.
    pub fn widen_ulp(x: f64) -> Self {
        Self::new(x.next_down(), x.next_up())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo * 0.5 + self.hi * 0.5
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        if a >= 0.0 && c >= 0.0 {
            return Interval::new(mul_down(a, c), mul_up(b, d));
        }
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval::new(lo, hi)
    }

    pub fn scale(&self, k: f64) -> Interval {
        self.mul(&Interval::point(k))
    }

    /// Panics if the divisor contains zero.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by an interval containing 0");
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = div_down(a, c).min(div_down(a, d)).min(div_down(b, c)).min(div_down(b, d));
        let hi = div_up(a, c).max(div_up(a, d)).max(div_up(b, c)).max(div_up(b, d));
        Interval::new(lo, hi)
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, (-self.lo).max(self.hi))
        }
    }

    /// Square root of the non-negative part; panics if entirely negative.
    pub fn sqrt(&self) -> Interval {
        assert!(self.hi >= 0.0, "sqrt of a negative interval");
        Interval::new(sqrt_down(self.lo.max(0.0)), sqrt_up(self.hi))
    }

    /// Left-to-right sum; the order is part of the contract (bitwise reproducibility).
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Interval>) -> Interval {
        items
            .into_iter()
            .fold(Interval::point(0.0), |acc, x| acc.add(x))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `0x1.8p+1`-style literal; exact for every finite binary64.
pub fn to_hex_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{:013x}", mant);
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() {
        String::new()
    } else {
        format!(".{digits}")
    };
    let esign = if e >= 0 { "+" } else { "-" };
    format!("{sign}0x{lead}{frac}p{esign}{}", e.abs())
}

/// Inverse of [`to_hex_float`]; accepts the normalized forms it writes.
pub fn parse_hex_float(s: &str) -> Option<f64> {
    let s = s.trim();
    match s {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let body = body.strip_prefix("0x")?;
    let (mantissa, exp) = body.split_once('p')?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, frac) = match mantissa.split_once('.') {
        Some((l, f)) => (l, f),
        None => (mantissa, ""),
    };
    let lead: u64 = u64::from_str_radix(lead, 16).ok()?;
    if lead > 1 || frac.len() > 13 {
        return None;
    }
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).ok()? << (4 * (13 - frac.len()))
    };
    let bits = if lead == 0 {
        if frac_bits == 0 {
            0
        } else if exp == -1022 {
            frac_bits
        } else {
            return None;
        }
    } else {
        let biased = exp + 1023;
        if !(1..=2046).contains(&biased) {
            return None;
        }
        ((biased as u64) << 52) | frac_bits
    };
    let x = f64::from_bits(bits);
    Some(if neg { -x } else { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    #[test]
    fn directed_rounding_brackets_exact_results() {
        let a = 0.1;
        let b = 0.2;
        let exact = q(a) + q(b);
        assert!(q(add_down(a, b)) <= exact && exact <= q(add_up(a, b)));
        assert!(add_down(a, b) < add_up(a, b));
        // exact operations are not widened
        assert_eq!(add_down(0.5, 0.25), 0.75);
        assert_eq!(mul_up(3.0, 0.5), 1.5);
        assert_eq!(sqrt_down(4.0), 2.0);
        assert_eq!(sqrt_up(4.0), 2.0);
    }

    #[test]
    fn sqrt_of_two() {
        let r = Interval::point(2.0).sqrt();
        let (lo, hi) = (q(r.lo()), q(r.hi()));
        let two = q(2.0);
        assert!(&lo * &lo <= two && two <= &hi * &hi);
    }

    #[test]
    fn hex_float_round_trip_examples() {
        for x in [0.0, -0.0, 1.0, 1.3, 0.18027, 1e-300, 5e-324, f64::MAX, -2.5e-7] {
            let s = to_hex_float(x);
            assert_eq!(parse_hex_float(&s).unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(to_hex_float(3.0), "0x1.8p+1");
    }

    proptest! {
        #[test]
        fn hex_float_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            prop_assert_eq!(parse_hex_float(&to_hex_float(x)).unwrap().to_bits(), bits);
        }

        #[test]
        fn div_brackets(a in -1e6f64..1e6, b in 1e-3f64..1e3) {
            let exact = q(a) / q(b);
            prop_assert!(q(div_down(a, b)) <= exact);
            prop_assert!(exact <= q(div_up(a, b)));
        }
    }
}
