use super::expr::{FactorExpr, TensorFactor};
use super::{positive, CalcError, FreeParam};
use crate::scalar::{parse_rational, Rational};

/// Parses a factor expression.
///
/// ```text
/// expr   := unary ("*" unary)*
/// unary  := atom | "(" expr ")"
///         | "tensor(" expr "," ("M" int | "LZ2") ")"
///         | "compress(" expr "," "gsq=" rational ")"
/// atom   := "C" | "LZ" | "LZ2" | "R" | "M" int | "LF(" rational | "inf" ")"
/// ```
///
/// Whitespace is ignored; `A * B * C` is one flat product while `(A * B) * C`
/// nests.
pub fn parse(text: &str) -> Result<FactorExpr, CalcError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.product()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> CalcError {
        self.error_at(self.pos, msg)
    }

    fn error_at(&self, pos: usize, msg: impl Into<String>) -> CalcError {
        CalcError::Parse { pos, msg: msg.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CalcError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        if !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(rest.len());
        self.pos += len;
        Some((start, &rest[..len]))
    }

    /// A run of characters that can form a number.
    fn number_text(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '/' | '.' | '-' | '+') || c.is_whitespace()))
            .unwrap_or(rest.len());
        let text = rest[..len].trim_end();
        self.pos += text.len();
        (start, text)
    }

    fn rational(&mut self) -> Result<(usize, Rational), CalcError> {
        let (start, text) = self.number_text();
        if text.is_empty() {
            return Err(self.error_at(start, "expected a number"));
        }
        parse_rational(text)
            .map(|r| (start, r))
            .map_err(|_| self.error_at(start, format!("invalid number {text:?}")))
    }

    fn size(&mut self) -> Result<u64, CalcError> {
        let (start, text) = self.number_text();
        let n: u64 = text.parse().map_err(|_| self.error_at(start, "expected a matrix size"))?;
        if n == 0 {
            return Err(self.error_at(start, "matrix size must be at least 1"));
        }
        Ok(n)
    }

    /// `M n`, `Mn` or `M(n)` after the identifier has been read.
    fn matrix_size(&mut self, ident_start: usize, ident: &str) -> Result<u64, CalcError> {
        let digits = &ident[1..];
        if !digits.is_empty() {
            let n: u64 = digits.parse().map_err(|_| self.error_at(ident_start, format!("unknown name {ident:?}")))?;
            if n == 0 {
                return Err(self.error_at(ident_start + 1, "matrix size must be at least 1"));
            }
            return Ok(n);
        }
        if self.eat('(') {
            let n = self.size()?;
            self.expect(')')?;
            Ok(n)
        } else {
            self.size()
        }
    }

    fn product(&mut self) -> Result<FactorExpr, CalcError> {
        let mut children = vec![self.unary()?];
        while self.eat('*') {
            children.push(self.unary()?);
        }
        Ok(FactorExpr::product(children))
    }

    fn unary(&mut self) -> Result<FactorExpr, CalcError> {
        if self.eat('(') {
            let e = self.product()?;
            self.expect(')')?;
            return Ok(e);
        }
        let Some((start, name)) = self.ident() else {
            return Err(self.error("expected a factor"));
        };
        match name {
            "C" => Ok(FactorExpr::C),
            "LZ" => Ok(FactorExpr::Lz),
            "LZ2" => Ok(FactorExpr::Lz2),
            "R" => Ok(FactorExpr::R),
            "LF" => {
                self.expect('(')?;
                let at = {
                    self.skip_ws();
                    self.pos
                };
                let param = if let Some((_, word)) = self.ident() {
                    if word == "inf" || word == "infinity" {
                        FreeParam::Infinite
                    } else {
                        return Err(self.error_at(at, format!("expected a number or inf, got {word:?}")));
                    }
                } else {
                    let (pos, r) = self.rational()?;
                    FreeParam::new(r).map_err(|e| self.error_at(pos, format!("r out of range: {e}")))?
                };
                self.expect(')')?;
                Ok(FactorExpr::Lf(param))
            }
            "tensor" => {
                self.expect('(')?;
                let inner = self.product()?;
                self.expect(',')?;
                let factor = match self.ident() {
                    Some((_, "LZ2")) => TensorFactor::Lz2,
                    Some((s, w)) if w.starts_with('M') => TensorFactor::Matrix(self.matrix_size(s, w)?),
                    Some((s, _)) => {
                        return Err(self.error_at(s, "tensor products are only taken with M n or LZ2"));
                    }
                    None => return Err(self.error("tensor products are only taken with M n or LZ2")),
                };
                self.expect(')')?;
                Ok(FactorExpr::tensor(inner, factor))
            }
            "compress" => {
                self.expect('(')?;
                let inner = self.product()?;
                self.expect(',')?;
                match self.ident() {
                    Some((_, "gsq")) => {}
                    _ => return Err(self.error("expected gsq=")),
                }
                self.expect('=')?;
                let (pos, gsq) = self.rational()?;
                positive(&gsq).map_err(|e| self.error_at(pos, e.to_string()))?;
                self.expect(')')?;
                Ok(FactorExpr::compress(inner, gsq))
            }
            w if w.starts_with('M') => Ok(FactorExpr::M(self.matrix_size(start, w)?)),
            other => Err(self.error_at(start, format!("unknown name {other:?}"))),
        }
    }
}
