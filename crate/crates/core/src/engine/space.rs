use std::collections::HashMap;

use num::{One, Signed};

use super::expr::{Atom, ElementExpr};
use super::law::GeneratorLaw;
use super::word::{FreeElement, LegId, Letter, Word};
use super::EngineError;
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_MAX_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub id: String,
    pub law: GeneratorLaw,
    pub names: Vec<String>,
}

/// A finite family of free legs with the free product trace.
///
/// A compressed space is the corner `pMp` of its parent, carrying the corner
/// projection and the rescaled normalization `τ(p)⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeSpace {
    legs: Vec<Leg>,
    names: HashMap<String, (LegId, Atom)>,
    normalization: Rational,
    corner: Option<Letter>,
    max_degree: usize,
}

impl Default for FreeSpace {
    fn default() -> Self {
        FreeSpace::new()
    }
}

impl FreeSpace {
    pub fn new() -> Self {
        FreeSpace {
            legs: Vec::new(),
            names: HashMap::new(),
            normalization: Rational::one(),
            corner: None,
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn add_leg(&mut self, id: &str, law: GeneratorLaw) -> Result<LegId, EngineError> {
        let names = law.default_names();
        self.add_leg_named(id, law, names)
    }

    /// Adds a leg whose generators are called `names` (one per atom; for Haar
    /// and circular legs the second name is the adjoint).
    pub fn add_leg_named(
        &mut self,
        id: &str,
        law: GeneratorLaw,
        names: Vec<String>,
    ) -> Result<LegId, EngineError> {
        law.validate()?;
        if self.legs.iter().any(|l| l.id == id) {
            return Err(EngineError::DuplicateLeg(id.to_string()));
        }
        if names.len() != law.atom_count() {
            return Err(EngineError::InvalidLaw(format!(
                "leg `{id}` needs {} generator names, got {}",
                law.atom_count(),
                names.len()
            )));
        }
        let leg = LegId(self.legs.len());
        for (a, name) in names.iter().enumerate() {
            if self.names.insert(name.clone(), (leg, a as Atom)).is_some() {
                return Err(EngineError::DuplicateName(name.clone()));
            }
        }
        self.legs.push(Leg { id: id.to_string(), law, names });
        Ok(leg)
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn leg(&self, id: LegId) -> Result<&Leg, EngineError> {
        self.legs.get(id.0).ok_or_else(|| EngineError::UnknownLeg(format!("#{}", id.0)))
    }

    pub fn leg_id(&self, id: &str) -> Result<LegId, EngineError> {
        self.legs
            .iter()
            .position(|l| l.id == id)
            .map(LegId)
            .ok_or_else(|| EngineError::UnknownLeg(id.to_string()))
    }

    pub fn law(&self, id: LegId) -> Result<&GeneratorLaw, EngineError> {
        Ok(&self.leg(id)?.law)
    }

    /// Resolves a generator name to its leg and atom.
    pub fn generator(&self, name: &str) -> Result<(LegId, Atom), EngineError> {
        self.names.get(name).copied().ok_or_else(|| EngineError::UnknownGenerator(name.to_string()))
    }

    /// The single-letter element for a generator name.
    pub fn gen(&self, name: &str) -> Result<FreeElement, EngineError> {
        let (leg, atom) = self.generator(name)?;
        Ok(FreeElement::letter(leg, ElementExpr::atom(atom)))
    }

    pub fn normalization(&self) -> &Rational {
        &self.normalization
    }

    pub fn corner(&self) -> Option<&Letter> {
        self.corner.as_ref()
    }

    /// The unit of this (possibly compressed) space.
    pub fn unit(&self) -> FreeElement {
        match &self.corner {
            Some(p) => FreeElement::letter(p.leg, p.expr.clone()),
            None => FreeElement::one(),
        }
    }

    fn check_letter(&self, letter: &Letter) -> Result<(), EngineError> {
        let leg = self.leg(letter.leg)?;
        let count = leg.law.atom_count();
        if let Some(a) = letter.expr.atoms().find(|&a| a as usize >= count) {
            return Err(EngineError::UnknownGenerator(format!("atom {a} on leg `{}`", leg.id)));
        }
        Ok(())
    }

    /// Merges neighbouring letters on the same leg, reducing each letter to
    /// canonical form. Scalar letters stay in place.
    pub fn merge(&self, w: &Word) -> Result<Word, EngineError> {
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        for letter in &w.letters {
            self.check_letter(letter)?;
            let law = self.law(letter.leg)?;
            match out.last_mut() {
                Some(last) if last.leg == letter.leg => {
                    last.expr = law.reduce(&last.expr.mul(&letter.expr));
                }
                _ => out.push(Letter::new(letter.leg, law.reduce(&letter.expr))),
            }
        }
        Ok(Word::new(out))
    }

    /// `e − τ(e)·1` inside one leg.
    pub fn center(&self, leg: LegId, e: &ElementExpr) -> Result<ElementExpr, EngineError> {
        let law = self.law(leg)?;
        let e = law.reduce(e);
        let t = law.trace(&e);
        Ok(e.sub(&law.one().scale(&t)))
    }

    /// `e − τ(p)⁻¹τ(e)·p`: centering relative to the corner of a projection `p`.
    pub fn relative_center(
        &self,
        p: &FreeElement,
        e: &FreeElement,
    ) -> Result<FreeElement, EngineError> {
        let tp = self.raw_trace(p)?;
        let inv = tp.inv().ok_or(EngineError::ZeroTrace)?;
        let te = self.raw_trace(e)?;
        Ok(e.sub(&p.scale(&(&inv * &te))))
    }

    /// Trace of a word in this space (ambient trace times the normalization).
    pub fn trace_word(&self, w: &Word) -> Result<Scalar, EngineError> {
        Ok(self.raw_trace_word(w)?.scale(&self.normalization))
    }

    pub fn trace(&self, e: &FreeElement) -> Result<Scalar, EngineError> {
        Ok(self.raw_trace(e)?.scale(&self.normalization))
    }

    /// `e − τ(e)·unit` in this space's trace.
    pub fn center_element(&self, e: &FreeElement) -> Result<FreeElement, EngineError> {
        let t = self.trace(e)?;
        Ok(e.sub(&self.unit().scale(&t)))
    }

    fn raw_trace(&self, e: &FreeElement) -> Result<Scalar, EngineError> {
        let mut total = Scalar::zero();
        for (c, w) in &e.terms {
            if c.is_zero() {
                continue;
            }
            total += &(c * &self.raw_trace_word(w)?);
        }
        Ok(total)
    }

    /// The free product trace of the ambient space.
    ///
    /// Letters are consumed left to right while a stack of centered letters on
    /// alternating legs is maintained. Each incoming letter `b` is split as
    /// `b° + τ(b)·1` (or, when it lands on the same leg as the stack top `a°`,
    /// the product `a°b` is split instead). A nonempty stack left at the end is
    /// a traveling product of centered letters and contributes zero.
    fn raw_trace_word(&self, w: &Word) -> Result<Scalar, EngineError> {
        let merged = self.merge(w)?;
        if merged.len() > self.max_degree {
            return Err(EngineError::DegreeTooLarge { degree: merged.len(), max: self.max_degree });
        }
        let mut prepared = Vec::with_capacity(merged.len());
        for letter in &merged.letters {
            let law = self.law(letter.leg)?;
            let t = law.trace(&letter.expr);
            let centered = letter.expr.sub(&law.one().scale(&t));
            prepared.push(Prepared { leg: letter.leg, expr: letter.expr.clone(), trace: t, centered });
        }
        // suffix_centered[i]: every letter from i on has trace zero
        let mut suffix_centered = vec![true; prepared.len() + 1];
        for i in (0..prepared.len()).rev() {
            suffix_centered[i] = suffix_centered[i + 1] && prepared[i].trace.is_zero();
        }
        let mut eval = Evaluator { space: self, letters: &prepared, suffix_centered: &suffix_centered };
        let mut stack = Vec::new();
        eval.run(&mut stack, 0)
    }

    /// Adjoint of a word.
    pub fn adjoint_word(&self, w: &Word) -> Result<Word, EngineError> {
        let mut letters = Vec::with_capacity(w.len());
        for letter in w.letters.iter().rev() {
            let law = self.law(letter.leg)?;
            letters.push(Letter::new(letter.leg, law.adjoint(&letter.expr)));
        }
        Ok(Word::new(letters))
    }

    pub fn adjoint(&self, e: &FreeElement) -> Result<FreeElement, EngineError> {
        let mut terms = Vec::with_capacity(e.terms.len());
        for (c, w) in &e.terms {
            terms.push((c.conj(), self.adjoint_word(w)?));
        }
        Ok(FreeElement { terms })
    }

    /// Merges every word and collects equal words.
    pub fn simplify(&self, e: &FreeElement) -> Result<FreeElement, EngineError> {
        let mut out: Vec<(Scalar, Word)> = Vec::new();
        for (c, w) in &e.terms {
            if c.is_zero() {
                continue;
            }
            let mut merged = self.merge(w)?;
            let mut coeff = c.clone();
            // pull out letters that are scalar multiples of 1 on their leg
            let mut k = 0;
            while k < merged.letters.len() {
                let letter = &merged.letters[k];
                let law = self.law(letter.leg)?;
                if let Some(s) = scalar_multiple_of_one(law, &letter.expr) {
                    coeff *= &s;
                    merged.letters.remove(k);
                    merged = self.merge(&merged)?;
                    k = 0;
                } else {
                    k += 1;
                }
            }
            if coeff.is_zero() {
                continue;
            }
            match out.iter_mut().find(|(_, w2)| *w2 == merged) {
                Some((c2, _)) => *c2 += &coeff,
                None => out.push((coeff, merged)),
            }
        }
        out.retain(|(c, _)| !c.is_zero());
        Ok(FreeElement { terms: out })
    }

    /// Exact equality of two elements after simplification.
    pub fn elements_equal(&self, a: &FreeElement, b: &FreeElement) -> Result<bool, EngineError> {
        Ok(self.simplify(&a.sub(b))?.terms.is_empty())
    }

    /// Compresses by a projection `p` lying in one leg: the corner `pMp` with
    /// trace `τ(p)⁻¹τ`. Words evaluated in the result are expected to lie in
    /// the corner already.
    pub fn compress(&self, leg: LegId, p: &ElementExpr) -> Result<FreeSpace, EngineError> {
        let law = self.law(leg)?;
        let p = law.reduce(p);
        if law.reduce(&p.mul(&p)) != p || law.reduce(&law.adjoint(&p)) != p {
            return Err(EngineError::NotAProjection);
        }
        if let Some(old) = &self.corner {
            let nested = old.leg == leg && law.reduce(&p.mul(&old.expr)) == p;
            if !nested {
                return Err(EngineError::InvalidLaw(
                    "nested compression must use a subprojection of the current corner".into(),
                ));
            }
        }
        let tp = law.trace(&p);
        if tp.is_zero() {
            return Err(EngineError::ZeroTrace);
        }
        if !tp.is_real() || !tp.re.is_positive() {
            return Err(EngineError::NotAProjection);
        }
        let mut out = self.clone();
        // corner traces are always rescaled from the ambient trace
        out.normalization = Rational::one() / &tp.re;
        out.corner = Some(Letter::new(leg, p));
        Ok(out)
    }
}

fn scalar_multiple_of_one(law: &GeneratorLaw, e: &ElementExpr) -> Option<Scalar> {
    let one = law.one();
    let (m, c) = one.terms().next()?;
    let coeff = e.terms().find(|(m2, _)| *m2 == m).map(|(_, v)| v.clone())?;
    let ratio = &coeff * &c.inv()?;
    (e.sub(&one.scale(&ratio))).is_zero().then_some(ratio)
}

struct Prepared {
    leg: LegId,
    expr: ElementExpr,
    trace: Scalar,
    centered: ElementExpr,
}

struct Evaluator<'a> {
    space: &'a FreeSpace,
    letters: &'a [Prepared],
    suffix_centered: &'a [bool],
}

impl Evaluator<'_> {
    fn run(&mut self, stack: &mut Vec<(LegId, ElementExpr)>, i: usize) -> Result<Scalar, EngineError> {
        if i == self.letters.len() {
            return Ok(if stack.is_empty() { Scalar::one() } else { Scalar::zero() });
        }
        let letter = &self.letters[i];
        let same_leg = stack.last().is_some_and(|(leg, _)| *leg == letter.leg);
        if !same_leg && self.suffix_centered[i] {
            // what remains is a traveling product of centered letters
            return Ok(Scalar::zero());
        }
        let mut total = Scalar::zero();
        if same_leg {
            let (leg, top) = stack.pop().expect("checked nonempty");
            let law = self.space.law(leg)?;
            let product = law.reduce(&top.mul(&letter.expr));
            let t = law.trace(&product);
            let centered = product.sub(&law.one().scale(&t));
            if !centered.is_zero() {
                stack.push((leg, centered));
                total += &self.run(stack, i + 1)?;
                stack.pop();
            }
            if !t.is_zero() {
                total += &(&t * &self.run(stack, i + 1)?);
            }
            stack.push((leg, top));
        } else {
            if !letter.centered.is_zero() {
                stack.push((letter.leg, letter.centered.clone()));
                total += &self.run(stack, i + 1)?;
                stack.pop();
            }
            if !letter.trace.is_zero() {
                total += &(&letter.trace * &self.run(stack, i + 1)?);
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::text::{parse_element, parse_word};
    use crate::scalar::rat;

    fn two_projections(alpha: Rational, beta: Rational) -> FreeSpace {
        let mut s = FreeSpace::new();
        s.add_leg_named("P", GeneratorLaw::projection(alpha), vec!["p".into()]).unwrap();
        s.add_leg_named("Q", GeneratorLaw::projection(beta), vec!["q".into()]).unwrap();
        s
    }

    fn tr(s: &FreeSpace, text: &str) -> Scalar {
        s.trace(&parse_element(s, text).unwrap()).unwrap()
    }

    #[test]
    fn projection_words() {
        let s = two_projections(rat(1, 2), rat(1, 2));
        assert_eq!(tr(&s, "p q"), Scalar::ratio(1, 4));
        assert_eq!(tr(&s, "(p q)^2"), Scalar::ratio(3, 16));
        for (a, b) in [(rat(1, 3), rat(1, 5)), (rat(2, 7), rat(3, 4))] {
            let s = two_projections(a.clone(), b.clone());
            let expected = &a * &b * (&a + &b - &a * &b);
            assert_eq!(tr(&s, "p q p q"), Scalar::real(expected));
        }
    }

    #[test]
    fn free_semicirculars_alternate_to_zero() {
        let mut s = FreeSpace::new();
        s.add_leg_named("A", GeneratorLaw::semicircular(), vec!["X1".into()]).unwrap();
        s.add_leg_named("B", GeneratorLaw::semicircular(), vec!["X2".into()]).unwrap();
        assert_eq!(tr(&s, "X1 X2 X1 X2"), Scalar::zero());
        assert_eq!(tr(&s, "X1 X1 X2 X2"), Scalar::one());
        assert_eq!(tr(&s, "X1^2 X2^2 X1^2"), Scalar::from_i64(2));
    }

    #[test]
    fn haar_powers_vanish() {
        let mut s = FreeSpace::new();
        s.add_leg("U", GeneratorLaw::HaarUnitary).unwrap();
        for n in 1..=6 {
            assert!(tr(&s, &format!("u^{n}")).is_zero());
            assert!(tr(&s, &format!("(u*)^{n}")).is_zero());
        }
        assert_eq!(tr(&s, "u^3 (u*)^3"), Scalar::one());
    }

    #[test]
    fn centering() {
        let s = two_projections(rat(1, 2), rat(1, 2));
        let (leg, _) = s.generator("p").unwrap();
        let c = s.center(leg, &ElementExpr::atom(0)).unwrap();
        assert_eq!(c, ElementExpr::atom(0).sub(&ElementExpr::scalar(Scalar::ratio(1, 2))));
        assert!(s.center(leg, &ElementExpr::one()).unwrap().is_zero());

        let p = s.gen("p").unwrap();
        let pqp = parse_element(&s, "p q p").unwrap();
        let rel = s.relative_center(&p, &pqp).unwrap();
        let expected = parse_element(&s, "p q p - 1/2 p").unwrap();
        assert!(s.elements_equal(&rel, &expected).unwrap());
    }

    #[test]
    fn compressed_semicircular() {
        for alpha in [rat(1, 2), rat(1, 4), rat(3, 4)] {
            let mut s = FreeSpace::new().with_max_degree(17);
            let p = s.add_leg_named("P", GeneratorLaw::projection(alpha.clone()), vec!["p".into()]).unwrap();
            s.add_leg("S", GeneratorLaw::semicircular()).unwrap();
            let corner = s.compress(p, &ElementExpr::atom(0)).unwrap();
            assert_eq!(tr(&corner, "p"), Scalar::one());
            for k in 1..=8i64 {
                let word = format!("(p X p)^{k}");
                let expected = crate::nc::semicircle_moment(k, &alpha).unwrap();
                assert_eq!(tr(&corner, &word), Scalar::real(expected), "alpha {alpha}, k {k}");
            }
        }
    }

    #[test]
    fn matrix_unit_corner() {
        let mut s = FreeSpace::new();
        let units = s.add_leg("E", GeneratorLaw::MatrixUnits { n: 2 }).unwrap();
        s.add_leg("S", GeneratorLaw::semicircular()).unwrap();
        let corner = crate::engine::matrix_corner(&s, units).unwrap();
        assert_eq!(tr(&corner, "(e11 X e11)^2"), Scalar::ratio(1, 2));
        assert_eq!(tr(&corner, "e11 X e21 (e11 X e21)*"), Scalar::ratio(1, 2));
        assert_eq!(tr(&corner, "e11 X e21"), Scalar::zero());
    }

    #[test]
    fn compression_rejects_non_projections() {
        let mut s = FreeSpace::new();
        let leg = s.add_leg("S", GeneratorLaw::semicircular()).unwrap();
        assert_eq!(s.compress(leg, &ElementExpr::atom(0)), Err(EngineError::NotAProjection));
        let mut s = FreeSpace::new();
        let e = s.add_leg("E", GeneratorLaw::MatrixUnits { n: 2 }).unwrap();
        assert_eq!(s.compress(e, &ElementExpr::zero()), Err(EngineError::ZeroTrace));
    }

    #[test]
    fn degree_bound() {
        let s = two_projections(rat(1, 2), rat(1, 2)).with_max_degree(4);
        let w = parse_word(&s, "(p q)^3").unwrap();
        assert_eq!(s.trace_word(&w), Err(EngineError::DegreeTooLarge { degree: 6, max: 4 }));
    }
}
