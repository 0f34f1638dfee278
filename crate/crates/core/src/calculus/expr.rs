use std::fmt;

use serde::{Serialize, Serializer};

use super::FreeParam;
use crate::scalar::{fmt_rational, Rational};

/// The right-hand factor of a tensor product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TensorFactor {
    /// `M_n`.
    Matrix(u64),
    /// `L(Z₂) ≅ C²` with the uniform trace.
    Lz2,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorExpr {
    /// The scalars, unit of the free product.
    C,
    /// `L(Z)`.
    Lz,
    /// `L(Z₂)`.
    Lz2,
    /// The hyperfinite II₁ factor.
    R,
    /// `M_n`, `n ≥ 1`.
    M(u64),
    /// `L(F_r)`.
    Lf(FreeParam),
    /// At least two children.
    FreeProduct(Vec<FactorExpr>),
    Tensor(Box<FactorExpr>, TensorFactor),
    /// The amplification `M_γ`, carried by `γ² > 0`.
    Compress(Box<FactorExpr>, Rational),
}

impl FactorExpr {
    pub fn lf(r: Rational) -> Result<Self, super::CalcError> {
        Ok(FactorExpr::Lf(FreeParam::new(r)?))
    }

    pub fn tensor(e: FactorExpr, f: TensorFactor) -> Self {
        FactorExpr::Tensor(Box::new(e), f)
    }

    pub fn compress(e: FactorExpr, gsq: Rational) -> Self {
        FactorExpr::Compress(Box::new(e), gsq)
    }

    /// A product of the given children; a single child stands for itself.
    pub fn product(mut children: Vec<FactorExpr>) -> Self {
        if children.len() == 1 {
            children.pop().expect("one child")
        } else {
            FactorExpr::FreeProduct(children)
        }
    }

    /// `LF(r)`, `R`, `M n` or `C`.
    pub fn is_canonical(&self) -> bool {
        matches!(self, FactorExpr::C | FactorExpr::R | FactorExpr::M(_) | FactorExpr::Lf(_))
    }

    pub fn children(&self) -> Vec<&FactorExpr> {
        match self {
            FactorExpr::FreeProduct(cs) => cs.iter().collect(),
            FactorExpr::Tensor(e, _) | FactorExpr::Compress(e, _) => vec![e],
            _ => Vec::new(),
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&FactorExpr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at(rest)),
        }
    }

    /// Replaces the subexpression at `path`.
    pub fn replace_at(&self, path: &[usize], new: FactorExpr) -> Option<FactorExpr> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(new);
        };
        Some(match self {
            FactorExpr::FreeProduct(cs) => {
                let mut cs = cs.clone();
                let slot = cs.get_mut(i)?;
                *slot = slot.replace_at(rest, new)?;
                FactorExpr::FreeProduct(cs)
            }
            FactorExpr::Tensor(e, f) if i == 0 => FactorExpr::Tensor(Box::new(e.replace_at(rest, new)?), f.clone()),
            FactorExpr::Compress(e, g) if i == 0 => FactorExpr::Compress(Box::new(e.replace_at(rest, new)?), g.clone()),
            _ => return None,
        })
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

impl fmt::Display for TensorFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorFactor::Matrix(n) => write!(f, "M{n}"),
            TensorFactor::Lz2 => f.write_str("LZ2"),
        }
    }
}

impl fmt::Display for FactorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorExpr::C => f.write_str("C"),
            FactorExpr::Lz => f.write_str("LZ"),
            FactorExpr::Lz2 => f.write_str("LZ2"),
            FactorExpr::R => f.write_str("R"),
            FactorExpr::M(n) => write!(f, "M{n}"),
            FactorExpr::Lf(r) => write!(f, "LF({r})"),
            FactorExpr::FreeProduct(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    if matches!(c, FactorExpr::FreeProduct(_)) {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
            FactorExpr::Tensor(e, t) => write!(f, "tensor({e}, {t})"),
            FactorExpr::Compress(e, g) => write!(f, "compress({e}, gsq={})", fmt_rational(g)),
        }
    }
}

impl Serialize for FactorExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
