use std::fmt;

/// A freely reduced word in the free group on generators `x1..xn`.
///
/// Letters are stored as signed generator numbers: `+k` is `x_k`, `-k` is
/// `x_k^-1` (1-based). Adjacent inverse pairs never occur.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FreeWord {
    letters: Vec<i8>,
}

impl FreeWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// The word `x_k^exp` for 1-based `k`.
    pub fn generator(k: usize, exp: i8) -> Self {
        debug_assert!(k >= 1 && k <= i8::MAX as usize && (exp == 1 || exp == -1));
        Self {
            letters: vec![exp * k as i8],
        }
    }

    /// Builds a word from raw letters, reducing it.
    pub fn from_letters(letters: &[i8]) -> Self {
        let mut w = Self::identity();
        for &l in letters {
            w.push(l);
        }
        w
    }

    pub fn letters(&self) -> &[i8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != -w[1]) && self.letters.iter().all(|&l| l != 0)
    }

    fn push(&mut self, letter: i8) {
        debug_assert!(letter != 0);
        if self.letters.last() == Some(&-letter) {
            self.letters.pop();
        } else {
            self.letters.push(letter);
        }
    }

    /// `self * other`, freely reduced.
    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    pub fn mul_assign(&mut self, other: &FreeWord) {
        for &l in &other.letters {
            self.push(l);
        }
    }

    /// `other * self`, freely reduced.
    pub fn premul_assign(&mut self, other: &FreeWord) {
        let mut k = 0;
        let o = &other.letters;
        while k < o.len() && k < self.letters.len() && o[o.len() - 1 - k] == -self.letters[k] {
            k += 1;
        }
        let mut out = Vec::with_capacity(o.len() - k + self.letters.len() - k);
        out.extend_from_slice(&o[..o.len() - k]);
        out.extend_from_slice(&self.letters[k..]);
        self.letters = out;
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord {
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// Evaluates the homomorphism `x_k -> images[k-1]` on this word.
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        let mut out = FreeWord::identity();
        for &l in &self.letters {
            let img = &images[l.unsigned_abs() as usize - 1];
            if l > 0 {
                out.mul_assign(img);
            } else {
                out.mul_assign(&img.inverse());
            }
        }
        out
    }

    /// Appends the letters (as bytes) to a key buffer.
    pub(crate) fn write_key(&self, buf: &mut Vec<u8>) {
        buf.extend(self.letters.iter().map(|&l| l as u8));
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (k, &l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, "·")?;
            }
            if l > 0 {
                write!(f, "x{}", l)?;
            } else {
                write!(f, "x{}⁻¹", -l)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduces_adjacent_inverses() {
        let w = FreeWord::from_letters(&[1, 2, -2, -1, 3]);
        assert_eq!(w.letters(), &[3]);
        assert!(w.is_reduced());
    }

    #[test]
    fn premul_cancels_at_the_junction() {
        let mut w = FreeWord::from_letters(&[-2, 1, 3]);
        w.premul_assign(&FreeWord::from_letters(&[4, 2]));
        assert_eq!(w.letters(), &[4, 1, 3]);
    }

    proptest! {
        #[test]
        fn inverse_cancels(raw in proptest::collection::vec(prop_oneof![-3i8..=-1, 1i8..=3], 0..20)) {
            let w = FreeWord::from_letters(&raw);
            prop_assert!(w.is_reduced());
            prop_assert!(w.mul(&w.inverse()).is_empty());
            let mut p = w.clone();
            p.premul_assign(&w.inverse());
            prop_assert!(p.is_empty());
        }
    }
}
