//! SAut(Fₙ) generated by Nielsen transvections.
//!
//! Elements are paths in the graph of generating n-tuples: a word over the
//! transvection alphabet together with the tuple it reaches from the standard
//! basis `(x1, …, xn)`. The tuple is the canonical key.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::free::FreeWord;
use super::signed_perm::SignedPermutation;
use super::{GroupContext, GroupDescriptor, Key};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// `x_i -> x_j^{±1} x_i`
    Left,
    /// `x_i -> x_i x_j^{±1}`
    Right,
}

/// `R^±_{i,j}` or `L^±_{i,j}`; indices are 0-based internally.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transvection {
    side: Side,
    i: u8,
    j: u8,
    sign: i8,
}

impl Transvection {
    /// Validated constructor taking 1-based indices, as written in the literature.
    pub fn new(side: Side, i: usize, j: usize, sign: i8, n: usize) -> Result<Self> {
        for idx in [i, j] {
            if idx == 0 || idx > n {
                return Err(Error::IndexOutOfRange { index: idx, rank: n });
            }
        }
        if i == j {
            return Err(Error::DegenerateTransvection(i));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::Unsupported(format!("exponent {sign}")));
        }
        Ok(Self {
            side,
            i: (i - 1) as u8,
            j: (j - 1) as u8,
            sign,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// 1-based `(i, j)`.
    pub fn indices(&self) -> (usize, usize) {
        (self.i as usize + 1, self.j as usize + 1)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn inverse(&self) -> Self {
        Self {
            sign: -self.sign,
            ..*self
        }
    }

    /// Checks the letter against a rank.
    pub fn validate(&self, n: usize) -> Result<()> {
        let (i, j) = self.indices();
        Self::new(self.side, i, j, self.sign, n).map(|_| ())
    }

    /// Replaces entry `i` of the tuple by `t_i t_j^±` (R) or `t_j^± t_i` (L).
    pub fn apply_in_place(&self, tuple: &mut [FreeWord]) {
        let (i, j) = (self.i as usize, self.j as usize);
        let factor = if self.sign > 0 {
            tuple[j].clone()
        } else {
            tuple[j].inverse()
        };
        match self.side {
            Side::Right => tuple[i].mul_assign(&factor),
            Side::Left => tuple[i].premul_assign(&factor),
        }
    }

    /// Also the automorphism itself when applied to the standard tuple.
    pub fn apply(&self, tuple: &[FreeWord]) -> Result<Vec<FreeWord>> {
        self.validate(tuple.len())?;
        let mut out = tuple.to_vec();
        self.apply_in_place(&mut out);
        Ok(out)
    }

    /// The 4n(n−1) transvections in a fixed order.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(4 * n * n.saturating_sub(1));
        for i in 0..n as u8 {
            for j in 0..n as u8 {
                if i == j {
                    continue;
                }
                for side in [Side::Right, Side::Left] {
                    for sign in [1, -1] {
                        out.push(Self { side, i, j, sign });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for Transvection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Transvection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => 'L',
            Side::Right => 'R',
        };
        let sign = if self.sign > 0 { '+' } else { '-' };
        write!(f, "{side}{sign}_{},{}", self.i + 1, self.j + 1)
    }
}

/// A word over the transvection alphabet, read left to right.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AutWord {
    pub letters: Vec<Transvection>,
}

impl AutWord {
    pub fn new(letters: Vec<Transvection>) -> Self {
        Self { letters }
    }

    /// Image of the standard tuple under left-to-right application.
    pub fn image(&self, n: usize) -> Result<Vec<FreeWord>> {
        for t in &self.letters {
            t.validate(n)?;
        }
        let mut tuple = standard_tuple(n);
        for t in &self.letters {
            t.apply_in_place(&mut tuple);
        }
        Ok(tuple)
    }

    /// Reversed word with every exponent flipped.
    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(Transvection::inverse).collect(),
        }
    }

    /// Equality as automorphisms: compare images of the standard tuple.
    pub fn equals(&self, other: &AutWord, n: usize) -> Result<bool> {
        Ok(self.image(n)? == other.image(n)?)
    }
}

impl fmt::Debug for AutWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.letters)
    }
}

pub(crate) fn standard_tuple(n: usize) -> Vec<FreeWord> {
    (1..=n).map(|k| FreeWord::generator(k, 1)).collect()
}

/// Symbolic conjugation `σ t σ⁻¹`.
///
/// Indices are permuted by σ; the exponent is multiplied by the signs of
/// both indices; the side flips when the modified generator is inverted.
pub fn sigma_conjugate(sigma: &SignedPermutation, t: &Transvection) -> Transvection {
    let (i, j) = (t.i as usize, t.j as usize);
    let (ei, ej) = (sigma.signs()[i], sigma.signs()[j]);
    let side = if ei > 0 {
        t.side
    } else {
        match t.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    };
    Transvection {
        side,
        i: sigma.perm()[i],
        j: sigma.perm()[j],
        sign: ei * ej * t.sign,
    }
}

/// `σ ∘ f ∘ σ⁻¹` evaluated on the standard tuple, given the image tuple of `f`.
fn conjugate_image(sigma: &SignedPermutation, image: &[FreeWord]) -> Vec<FreeWord> {
    let inv = sigma.inverse();
    let n = image.len();
    (0..n)
        .map(|k| {
            let pre = inv.apply_word(&FreeWord::generator(k + 1, 1));
            sigma.apply_word(&pre.substitute(image))
        })
        .collect()
}

/// An element of SAut(Fₙ): a word and the tuple it reaches.
#[derive(Clone)]
pub struct AutElem {
    pub word: AutWord,
    pub image: Box<[FreeWord]>,
}

impl fmt::Debug for AutElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ↦ {:?}", self.word, self.image)
    }
}

impl PartialEq for AutElem {
    fn eq(&self, other: &Self) -> bool {
        self.image == other.image
    }
}

impl Eq for AutElem {}

/// SAut(Fₙ) with generating set all transvections.
#[derive(Clone, Debug)]
pub struct SAut {
    n: usize,
    letters: Vec<Transvection>,
}

impl SAut {
    /// Builds the group and verifies the symbolic conjugation table against
    /// functional evaluation for every Σ-generator and every letter.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n > 9 {
            return Err(Error::Unsupported(format!("SAut(F{n}) needs 2 <= n <= 9")));
        }
        let g = Self {
            n,
            letters: Transvection::all(n),
        };
        g.verify_conjugation(&SignedPermutation::wreath_generators(n))?;
        Ok(g)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[Transvection] {
        &self.letters
    }

    pub fn element(&self, word: AutWord) -> Result<AutElem> {
        let image = word.image(self.n)?.into_boxed_slice();
        Ok(AutElem { word, image })
    }

    pub fn letter(&self, t: Transvection) -> AutElem {
        self.element(AutWord::new(vec![t])).expect("valid letter")
    }

    /// Checks `sigma_conjugate` against evaluation for the given σ's.
    pub fn verify_conjugation(&self, sigmas: &[SignedPermutation]) -> Result<()> {
        for sigma in sigmas {
            for t in &self.letters {
                let symbolic = sigma_conjugate(sigma, t);
                let functional = conjugate_image(sigma, &self.letter(*t).image);
                let found = self.letter(symbolic).image;
                if *found != functional[..] || !self.letters.contains(&symbolic) {
                    return Err(Error::ConjugateNotInGenerators {
                        letter: t.to_string(),
                        sigma: sigma.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Functional conjugation, independent of the symbolic table.
    pub fn conjugate_functional(&self, sigma: &SignedPermutation, a: &AutElem) -> Vec<FreeWord> {
        conjugate_image(sigma, &a.image)
    }
}

impl GroupContext for SAut {
    type Elem = AutElem;

    fn identity(&self) -> AutElem {
        AutElem {
            word: AutWord::default(),
            image: standard_tuple(self.n).into_boxed_slice(),
        }
    }

    fn mul(&self, a: &AutElem, b: &AutElem) -> AutElem {
        let mut image = a.image.clone();
        for t in &b.word.letters {
            t.apply_in_place(&mut image);
        }
        let mut letters = a.word.letters.clone();
        letters.extend_from_slice(&b.word.letters);
        AutElem {
            word: AutWord::new(letters),
            image,
        }
    }

    fn inverse(&self, a: &AutElem) -> AutElem {
        self.element(a.word.inverse()).expect("valid word")
    }

    fn key(&self, a: &AutElem) -> Key {
        let mut buf = Vec::with_capacity(a.image.iter().map(|w| w.len() + 1).sum());
        for (k, w) in a.image.iter().enumerate() {
            if k > 0 {
                buf.push(0);
            }
            w.write_key(&mut buf);
        }
        buf.into_boxed_slice()
    }

    fn generators(&self) -> Vec<AutElem> {
        self.letters.iter().map(|&t| self.letter(t)).collect()
    }

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor::Saut(self.n)
    }

    fn symmetry_rank(&self) -> usize {
        self.n
    }

    fn conjugate(&self, sigma: &SignedPermutation, a: &AutElem) -> AutElem {
        let word = AutWord::new(a.word.letters.iter().map(|t| sigma_conjugate(sigma, t)).collect());
        self.element(word).expect("conjugate letters are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fw(letters: &[i8]) -> FreeWord {
        FreeWord::from_letters(letters)
    }

    fn t(side: Side, i: usize, j: usize, sign: i8, n: usize) -> Transvection {
        Transvection::new(side, i, j, sign, n).unwrap()
    }

    #[test]
    fn transvection_examples() {
        let base = standard_tuple(2);
        let r = t(Side::Right, 1, 2, 1, 2).apply(&base).unwrap();
        assert_eq!(r, vec![fw(&[1, 2]), fw(&[2])]);
        let l = t(Side::Left, 1, 2, 1, 2).apply(&base).unwrap();
        assert_eq!(l, vec![fw(&[2, 1]), fw(&[2])]);
        let tuple = vec![fw(&[1, -3, 2]), fw(&[2, 2]), fw(&[3])];
        let rm = t(Side::Right, 1, 2, -1, 3);
        let back = rm.inverse().apply(&rm.apply(&tuple).unwrap()).unwrap();
        assert_eq!(back, tuple);
    }

    #[test]
    fn out_of_range_and_degenerate_letters_are_rejected() {
        assert!(matches!(
            Transvection::new(Side::Right, 1, 4, 1, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            Transvection::new(Side::Left, 2, 2, 1, 3),
            Err(Error::DegenerateTransvection(2))
        ));
        let bad = t(Side::Right, 1, 3, 1, 3);
        assert!(bad.apply(&standard_tuple(2)).is_err());
    }

    #[test]
    fn word_image_examples() {
        assert_eq!(AutWord::default().image(3).unwrap(), standard_tuple(3));
        let r = t(Side::Right, 1, 2, 1, 2);
        assert_eq!(
            AutWord::new(vec![r, r]).image(2).unwrap(),
            vec![fw(&[1, 2, 2]), fw(&[2])]
        );
        assert_eq!(AutWord::new(vec![r, r.inverse()]).image(2).unwrap(), standard_tuple(2));
    }

    #[test]
    fn equality_examples() {
        let r = t(Side::Right, 1, 2, 1, 2);
        let l = t(Side::Left, 1, 2, 1, 2);
        let a = AutWord::new(vec![r]);
        assert!(a.equals(&AutWord::new(vec![r]), 2).unwrap());
        assert!(AutWord::new(vec![r, r.inverse()]).equals(&AutWord::default(), 2).unwrap());
        assert!(!a.equals(&AutWord::new(vec![l]), 2).unwrap());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(AutWord::default().inverse(), AutWord::default());
        let r = t(Side::Right, 1, 2, 1, 3);
        assert_eq!(AutWord::new(vec![r]).inverse(), AutWord::new(vec![r.inverse()]));
        let l = t(Side::Left, 3, 1, -1, 3);
        assert_eq!(
            AutWord::new(vec![r, l]).inverse(),
            AutWord::new(vec![t(Side::Left, 3, 1, 1, 3), t(Side::Right, 1, 2, -1, 3)])
        );
        let g = SAut::new(3).unwrap();
        let w = g.element(AutWord::new(vec![r, l, r])).unwrap();
        assert!(g.eq(&g.mul(&w, &g.inverse(&w)), &g.identity()));
    }

    #[test]
    fn conjugation_examples() {
        let n = 3;
        let id = SignedPermutation::identity(n);
        let r13 = t(Side::Right, 1, 3, 1, n);
        assert_eq!(sigma_conjugate(&id, &r13), r13);
        let swap = SignedPermutation::transposition(n, 0, 1);
        assert_eq!(sigma_conjugate(&swap, &r13), t(Side::Right, 2, 3, 1, n));
        let flip = SignedPermutation::flip(n, 0);
        assert_eq!(
            sigma_conjugate(&flip, &t(Side::Right, 1, 2, 1, n)),
            t(Side::Left, 1, 2, -1, n)
        );
    }

    #[test]
    fn generating_set_size_and_no_involutions() {
        for n in 2..=5 {
            let g = SAut::new(n).unwrap();
            assert_eq!(g.generators().len(), 4 * n * (n - 1));
            assert!(!g.has_involution());
        }
    }

    #[test]
    fn conjugation_is_exhaustively_functional_and_an_action() {
        for n in 2..=4 {
            let g = SAut::new(n).unwrap();
            let sigmas = SignedPermutation::enumerate(n);
            g.verify_conjugation(&sigmas).unwrap();
            for a in sigmas.iter().step_by(5) {
                for b in sigmas.iter().step_by(11) {
                    let ab = a.compose(b);
                    for l in g.letters() {
                        assert_eq!(
                            sigma_conjugate(a, &sigma_conjugate(b, l)),
                            sigma_conjugate(&ab, l)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn letter_orbit_is_all_of_s() {
        use std::collections::HashSet;
        for n in 2..=5 {
            let g = SAut::new(n).unwrap();
            let start = g.letters()[0];
            let orbit: HashSet<Transvection> = SignedPermutation::enumerate(n)
                .iter()
                .map(|s| sigma_conjugate(s, &start))
                .collect();
            assert_eq!(orbit.len(), g.letters().len());
        }
    }

    #[test]
    fn key_is_a_congruence_on_random_words() {
        use rand::{Rng, SeedableRng};
        let g = SAut::new(3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let letters = g.letters().to_vec();
        let random_word = |rng: &mut rand_chacha::ChaCha8Rng, len: usize| {
            AutWord::new((0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect())
        };
        for _ in 0..200 {
            let u = random_word(&mut rng, 4);
            let v = random_word(&mut rng, 3);
            // u' differs from u as a word but is equal as an automorphism
            let pad = random_word(&mut rng, 2);
            let mut up = u.letters.clone();
            up.extend(pad.letters.iter());
            up.extend(pad.inverse().letters.iter());
            let a = g.element(u).unwrap();
            let ap = g.element(AutWord::new(up)).unwrap();
            let b = g.element(v).unwrap();
            assert_eq!(g.key(&a), g.key(&ap));
            assert_eq!(g.key(&g.mul(&a, &b)), g.key(&g.mul(&ap, &b)));
            assert_eq!(g.key(&g.mul(&b, &a)), g.key(&g.mul(&b, &ap)));
            assert_eq!(g.key(&g.inverse(&a)), g.key(&g.inverse(&ap)));
        }
    }

    #[test]
    fn conjugate_matches_functional_on_elements() {
        let g = SAut::new(3).unwrap();
        let ls = g.letters().to_vec();
        let w = g.element(AutWord::new(vec![ls[0], ls[7], ls[13]])).unwrap();
        for s in SignedPermutation::enumerate(3).iter().step_by(3) {
            assert_eq!(&*g.conjugate(s, &w).image, &g.conjugate_functional(s, &w)[..]);
        }
    }
}
