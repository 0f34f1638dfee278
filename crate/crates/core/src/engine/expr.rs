use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Generator index inside one leg.
pub type Atom = u16;

/// A noncommutative polynomial in the generators of a single leg.
///
/// The empty monomial is the identity. Canonical forms are the business of the
/// leg's law (see [`super::GeneratorLaw::reduce`]); this type only does free
/// algebra arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementExpr {
    terms: BTreeMap<Vec<Atom>, Scalar>,
}

impl ElementExpr {
    pub fn zero() -> Self {
        ElementExpr::default()
    }

    pub fn scalar(c: Scalar) -> Self {
        let mut e = ElementExpr::zero();
        e.add_term(Vec::new(), c);
        e
    }

    pub fn one() -> Self {
        ElementExpr::scalar(Scalar::one())
    }

    pub fn atom(a: Atom) -> Self {
        ElementExpr::monomial(vec![a], Scalar::one())
    }

    pub fn monomial(m: Vec<Atom>, c: Scalar) -> Self {
        let mut e = ElementExpr::zero();
        e.add_term(m, c);
        e
    }

    pub fn add_term(&mut self, m: Vec<Atom>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Atom>, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty monomial.
    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Vec::new()).cloned().unwrap_or_default()
    }

    /// `Some(c)` when the expression is `c·1` in free form.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.terms.keys().flat_map(|m| m.iter().copied())
    }

    /// Largest monomial length.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn add(&self, other: &ElementExpr) -> ElementExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ElementExpr) -> ElementExpr {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> ElementExpr {
        let mut out = ElementExpr::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Free product of monomials (concatenation), no relations applied.
    pub fn mul(&self, other: &ElementExpr) -> ElementExpr {
        let mut out = ElementExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = Vec::with_capacity(m1.len() + m2.len());
                m.extend_from_slice(m1);
                m.extend_from_slice(m2);
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// Adjoint given the involution on atoms: reverses monomials and conjugates coefficients.
    pub fn adjoint_with(&self, atom_adjoint: impl Fn(Atom) -> Atom) -> ElementExpr {
        let mut out = ElementExpr::zero();
        for (m, c) in &self.terms {
            let rev: Vec<Atom> = m.iter().rev().map(|&a| atom_adjoint(a)).collect();
            out.add_term(rev, c.conj());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_cancels() {
        let x = ElementExpr::atom(0);
        let e = x.add(&ElementExpr::one()).sub(&x);
        assert_eq!(e.as_scalar(), Some(Scalar::one()));
        let sq = x.add(&ElementExpr::one()).mul(&x.sub(&ElementExpr::one()));
        // (x+1)(x-1) = x^2 - 1 in the free algebra
        assert_eq!(sq.len(), 2);
        assert_eq!(sq.constant_term(), Scalar::from_i64(-1));
        assert_eq!(sq.degree(), 2);
    }

    #[test]
    fn adjoint_reverses_and_conjugates() {
        let e = ElementExpr::monomial(vec![0, 1], Scalar::i());
        let adj = e.adjoint_with(|a| 1 - a);
        assert_eq!(adj, ElementExpr::monomial(vec![0, 1], -Scalar::i()));
        assert_eq!(adj.adjoint_with(|a| 1 - a), e);
    }
}
