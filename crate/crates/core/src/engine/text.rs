//! Text and JSON forms of spaces, words and elements.
//!
//! Element syntax: sums and differences of juxtaposed factors. A factor is a
//! rational literal, `i`, a generator name, or a parenthesized element,
//! optionally followed by `*` (adjoint, written without a space) and `^k`.
//! Example: `(p q)^2 - 1/4 p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::ElementExpr;
use super::law::{FiniteDimAlgebra, GeneratorLaw};
use super::space::FreeSpace;
use super::word::{FreeElement, Letter, Word};
use super::EngineError;
use crate::scalar::{self, parse_rational, Rational, Scalar};

pub const SCHEMA: &str = "freefactor/1";

fn schema() -> String {
    SCHEMA.to_string()
}

fn one() -> Rational {
    scalar::int(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub legs: Vec<LegDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    /// Optional compression by a projection letter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<LetterDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegDoc {
    pub id: String,
    pub law: LawDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawDoc {
    Semicircular {
        #[serde(with = "scalar::rational_text", default = "one")]
        variance: Rational,
    },
    Projection {
        #[serde(with = "scalar::rational_text")]
        trace: Rational,
    },
    HaarUnitary,
    Circular,
    MatrixUnits {
        n: usize,
    },
    FiniteDim {
        names: Vec<String>,
        /// `table[a][b]` maps basis names to coefficients of `e_a e_b`.
        table: Vec<Vec<BTreeMap<String, Scalar>>>,
        unit: BTreeMap<String, Scalar>,
        trace: Vec<Scalar>,
        adjoint: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterDoc {
    pub leg: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordDoc {
    pub letters: Vec<LetterDoc>,
}

impl LawDoc {
    pub fn to_law(&self) -> Result<GeneratorLaw, EngineError> {
        Ok(match self {
            LawDoc::Semicircular { variance } => GeneratorLaw::Semicircular { variance: variance.clone() },
            LawDoc::Projection { trace } => GeneratorLaw::Projection { trace: trace.clone() },
            LawDoc::HaarUnitary => GeneratorLaw::HaarUnitary,
            LawDoc::Circular => GeneratorLaw::Circular,
            LawDoc::MatrixUnits { n } => GeneratorLaw::MatrixUnits { n: *n },
            LawDoc::FiniteDim { names, table, unit, trace, adjoint } => {
                let index = |name: &str| {
                    names.iter().position(|n| n == name).ok_or_else(|| {
                        EngineError::InvalidLaw(format!("unknown basis element `{name}`"))
                    })
                };
                let sparse = |m: &BTreeMap<String, Scalar>| -> Result<Vec<(usize, Scalar)>, EngineError> {
                    m.iter().map(|(k, v)| Ok((index(k)?, v.clone()))).collect()
                };
                let mut unit_vec = vec![Scalar::zero(); names.len()];
                for (k, v) in sparse(unit)? {
                    unit_vec[k] = v;
                }
                let table = table
                    .iter()
                    .map(|row| row.iter().map(&sparse).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                let adjoint = adjoint.iter().map(|a| index(a)).collect::<Result<Vec<_>, _>>()?;
                GeneratorLaw::FiniteDim(FiniteDimAlgebra {
                    names: names.clone(),
                    table,
                    unit: unit_vec,
                    trace: trace.clone(),
                    adjoint,
                })
            }
        })
    }

    pub fn from_law(law: &GeneratorLaw) -> LawDoc {
        match law {
            GeneratorLaw::Semicircular { variance } => LawDoc::Semicircular { variance: variance.clone() },
            GeneratorLaw::Projection { trace } => LawDoc::Projection { trace: trace.clone() },
            GeneratorLaw::HaarUnitary => LawDoc::HaarUnitary,
            GeneratorLaw::Circular => LawDoc::Circular,
            GeneratorLaw::MatrixUnits { n } => LawDoc::MatrixUnits { n: *n },
            GeneratorLaw::FiniteDim(alg) => {
                let dense = |pairs: &[(usize, Scalar)]| {
                    pairs.iter().map(|(k, v)| (alg.names[*k].clone(), v.clone())).collect()
                };
                let unit = alg
                    .unit
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (alg.names[k].clone(), c.clone()))
                    .collect();
                LawDoc::FiniteDim {
                    names: alg.names.clone(),
                    table: alg.table.iter().map(|row| row.iter().map(|c| dense(c)).collect()).collect(),
                    unit,
                    trace: alg.trace.clone(),
                    adjoint: alg.adjoint.iter().map(|&a| alg.names[a].clone()).collect(),
                }
            }
        }
    }
}

impl SpaceDoc {
    pub fn build(&self) -> Result<FreeSpace, EngineError> {
        let mut space = FreeSpace::new();
        if let Some(d) = self.max_degree {
            space = space.with_max_degree(d);
        }
        for leg in &self.legs {
            let law = leg.law.to_law()?;
            match &leg.names {
                Some(names) => {
                    let mut names = names.clone();
                    // Haar and circular legs may name only the generator
                    if names.len() == 1 && matches!(law, GeneratorLaw::HaarUnitary | GeneratorLaw::Circular) {
                        names.push(format!("{}*", names[0]));
                    }
                    space.add_leg_named(&leg.id, law, names)?;
                }
                None => {
                    space.add_leg(&leg.id, law)?;
                }
            }
        }
        if let Some(corner) = &self.corner {
            let letter = parse_letter(&space, corner)?;
            space = space.compress(letter.leg, &letter.expr)?;
        }
        Ok(space)
    }

    pub fn from_space(space: &FreeSpace) -> SpaceDoc {
        SpaceDoc {
            schema: schema(),
            legs: space
                .legs()
                .iter()
                .map(|l| LegDoc { id: l.id.clone(), law: LawDoc::from_law(&l.law), names: Some(l.names.clone()) })
                .collect(),
            max_degree: Some(space.max_degree()),
            corner: None,
        }
    }
}

impl WordDoc {
    pub fn build(&self, space: &FreeSpace) -> Result<Word, EngineError> {
        Ok(Word::new(self.letters.iter().map(|l| parse_letter(space, l)).collect::<Result<_, _>>()?))
    }
}

/// Parses a letter whose expression must live on the named leg.
pub fn parse_letter(space: &FreeSpace, doc: &LetterDoc) -> Result<Letter, EngineError> {
    let leg = space.leg_id(&doc.leg)?;
    let element = parse_element(space, &doc.expr)?;
    let mut expr = ElementExpr::zero();
    for (c, w) in &element.terms {
        match w.letters.as_slice() {
            [] => expr = expr.add(&ElementExpr::scalar(c.clone())),
            [only] if only.leg == leg => expr = expr.add(&only.expr.scale(c)),
            _ => {
                return Err(EngineError::Parse {
                    pos: 0,
                    msg: format!("`{}` does not lie on leg `{}`", doc.expr, doc.leg),
                })
            }
        }
    }
    Ok(Letter::new(leg, expr))
}

/// Parses an element in the space's generator names.
pub fn parse_element(space: &FreeSpace, text: &str) -> Result<FreeElement, EngineError> {
    let mut p = Parser { space, src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let e = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    space.simplify(&e)
}

/// Parses a single product (no sums) as a word.
pub fn parse_word(space: &FreeSpace, text: &str) -> Result<Word, EngineError> {
    let e = parse_element(space, text)?;
    match e.terms.as_slice() {
        [(c, w)] if c.is_one() => Ok(w.clone()),
        [] => Err(EngineError::Parse { pos: 0, msg: "word is zero".into() }),
        _ => Err(EngineError::Parse { pos: 0, msg: "expected a single word without coefficients".into() }),
    }
}

struct Parser<'a> {
    space: &'a FreeSpace,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> EngineError {
        EngineError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn sum(&mut self) -> Result<FreeElement, EngineError> {
        let mut negate = false;
        if let Some(b @ (b'+' | b'-')) = self.peek() {
            negate = b == b'-';
            self.pos += 1;
            self.skip_ws();
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.scale(&-Scalar::one());
        }
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'(')
    }

    fn term(&mut self) -> Result<FreeElement, EngineError> {
        if !self.starts_factor() {
            return Err(self.error("expected a factor"));
        }
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if !self.starts_factor() {
                return Ok(acc);
            }
            acc = acc.mul(&self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<FreeElement, EngineError> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    e = self.space.adjoint(&e)?;
                }
                Some(b'^') => {
                    self.pos += 1;
                    let start = self.pos;
                    while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    let k: usize = std::str::from_utf8(&self.src[start..self.pos])
                        .ok()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| self.error("expected an exponent"))?;
                    e = e.pow(k);
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<FreeElement, EngineError> {
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.sum()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() => {
                while self.peek().is_some_and(|b| b.is_ascii_digit() || b == b'/' || b == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let r = parse_rational(text).map_err(|_| EngineError::Parse {
                    pos: start,
                    msg: format!("bad number `{text}`"),
                })?;
                Ok(FreeElement::scalar(Scalar::real(r)))
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                while self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match self.space.gen(name) {
                    Ok(e) => Ok(e),
                    Err(_) if name == "i" => Ok(FreeElement::scalar(Scalar::i())),
                    Err(_) => Err(EngineError::Parse { pos: start, msg: format!("unknown generator `{name}`") }),
                }
            }
            _ => Err(self.error("expected a factor")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn projections() -> FreeSpace {
        let doc: SpaceDoc = serde_json::from_str(
            r#"{"legs":[{"id":"P","law":{"kind":"projection","trace":"1/2"},"names":["p"]},
                        {"id":"Q","law":{"kind":"projection","trace":"1/2"},"names":["q"]}]}"#,
        )
        .unwrap();
        doc.build().unwrap()
    }

    #[test]
    fn parses_powers_and_sums() {
        let s = projections();
        let w = parse_word(&s, "(p q)^2").unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(s.trace_word(&w).unwrap(), Scalar::ratio(3, 16));
        let e = parse_element(&s, "p - 1/2").unwrap();
        assert_eq!(s.trace(&e).unwrap(), Scalar::zero());
        let e = parse_element(&s, "-(p q p) + 2 i p*").unwrap();
        assert_eq!(s.trace(&e).unwrap(), "-1/4+i".parse().unwrap());
    }

    #[test]
    fn parse_errors_carry_position() {
        let s = projections();
        match parse_element(&s, "p z") {
            Err(EngineError::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_element(&s, "(p q").is_err());
        assert!(parse_word(&s, "p + q").is_err());
    }

    #[test]
    fn space_doc_round_trip() {
        let mut s = FreeSpace::new();
        s.add_leg("U", GeneratorLaw::MatrixUnits { n: 2 }).unwrap();
        s.add_leg("A", GeneratorLaw::FiniteDim(crate::engine::matrix_algebra(2))).unwrap();
        s.add_leg("X", GeneratorLaw::Semicircular { variance: rat(1, 2) }).unwrap();
        let doc = SpaceDoc::from_space(&s);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SpaceDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), s);
    }

    #[test]
    fn letters_must_stay_on_their_leg() {
        let s = projections();
        let bad = LetterDoc { leg: "P".into(), expr: "q".into() };
        assert!(parse_letter(&s, &bad).is_err());
        let good = LetterDoc { leg: "P".into(), expr: "p - 1/2".into() };
        assert_eq!(parse_letter(&s, &good).unwrap().expr.len(), 2);
    }

    #[test]
    fn corner_in_document() {
        let doc: SpaceDoc = serde_json::from_str(
            r#"{"legs":[{"id":"P","law":{"kind":"projection","trace":"1/4"}},
                        {"id":"S","law":{"kind":"semicircular"}}],
                "corner":{"leg":"P","expr":"p"}}"#,
        )
        .unwrap();
        let s = doc.build().unwrap();
        let w = parse_word(&s, "p X p X p").unwrap();
        assert_eq!(s.trace_word(&w).unwrap(), Scalar::ratio(1, 4));
    }
}
