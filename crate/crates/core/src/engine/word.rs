use super::expr::{Atom, ElementExpr};
use crate::scalar::Scalar;

/// Index of a leg inside its [`super::FreeSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegId(pub usize);

/// One factor of a word: a polynomial in the generators of a single leg.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Letter {
    pub leg: LegId,
    pub expr: ElementExpr,
}

impl Letter {
    pub fn new(leg: LegId, expr: ElementExpr) -> Self {
        Letter { leg, expr }
    }

    pub fn atom(leg: LegId, atom: Atom) -> Self {
        Letter { leg, expr: ElementExpr::atom(atom) }
    }
}

/// A product of letters. After merging neighbours on the same leg this is a
/// traveling product; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn identity() -> Self {
        Word::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn pow(&self, k: usize) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() * k);
        for _ in 0..k {
            letters.extend_from_slice(&self.letters);
        }
        Word { letters }
    }

    /// Consecutive letters sit on distinct legs.
    pub fn is_traveling(&self) -> bool {
        self.letters.windows(2).all(|w| w[0].leg != w[1].leg)
    }

    /// Cyclic rotation by `k` letters.
    pub fn rotate(&self, k: usize) -> Word {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let k = k % letters.len();
            letters.rotate_left(k);
        }
        Word { letters }
    }
}

/// A finite linear combination of words: a general element of the free product.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreeElement {
    pub terms: Vec<(Scalar, Word)>,
}

impl FreeElement {
    pub fn zero() -> Self {
        FreeElement::default()
    }

    pub fn scalar(c: Scalar) -> Self {
        FreeElement::from_word(Word::identity()).scale(&c)
    }

    pub fn one() -> Self {
        FreeElement::from_word(Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        FreeElement { terms: vec![(Scalar::one(), w)] }
    }

    pub fn letter(leg: LegId, expr: ElementExpr) -> Self {
        FreeElement::from_word(Word::new(vec![Letter::new(leg, expr)]))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.is_zero())
    }

    pub fn add(&self, other: &FreeElement) -> FreeElement {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        FreeElement { terms }
    }

    pub fn scale(&self, c: &Scalar) -> FreeElement {
        FreeElement { terms: self.terms.iter().map(|(v, w)| (v * c, w.clone())).collect() }
    }

    pub fn sub(&self, other: &FreeElement) -> FreeElement {
        self.add(&other.scale(&-Scalar::one()))
    }

    /// Distributes; words are concatenated without merging.
    pub fn mul(&self, other: &FreeElement) -> FreeElement {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, w1) in &self.terms {
            for (c2, w2) in &other.terms {
                let c = c1 * c2;
                if !c.is_zero() {
                    terms.push((c, w1.concat(w2)));
                }
            }
        }
        FreeElement { terms }
    }

    pub fn pow(&self, k: usize) -> FreeElement {
        let mut acc = FreeElement::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Largest word length.
    pub fn max_len(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }
}
