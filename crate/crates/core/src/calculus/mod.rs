//! Factor arithmetic: an expression language over `C`, `L(Z)`, `L(Z₂)`,
//! `M_n`, the hyperfinite factor `R` and the interpolated free group factors
//! `L(F_r)`, with certified rewriting to canonical form.

mod dichotomy;
mod expr;
mod parse;
mod rewrite;
mod standard;

use std::fmt;
use std::str::FromStr;

use num::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::{fmt_rational, parse_rational, Rational};

pub use dichotomy::{
    fundamental_group_derivation, verify_certificate, DichotomyCertificate, DichotomyStep, Identification,
    Justification,
};
pub use expr::{FactorExpr, TensorFactor};
pub use parse::parse;
pub use rewrite::{
    explore, local_rewrites, normalize, rewrites, verify_derivation, Derivation, Exploration, Normalized, Rule,
    Step, DEFAULT_STATE_LIMIT,
};
pub use standard::{reduce_multiset, standard_form, Item, Move, MoveKind, MultisetReduction, StandardForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("free parameter must exceed 1, got {0}")]
    ParamOutOfRange(String),
    #[error("compression parameter must be positive, got {0}")]
    NonPositiveCompression(String),
    #[error("standard form of L(F_inf) has no finite digit expansion")]
    InfiniteStandardForm,
    #[error("trace {0} is not a dyadic rational in (0, 1]")]
    NonDyadicTrace(String),
    #[error("derivation needs 1 < r < r' < inf, got r = {r}, r' = {r_prime}")]
    BadIdentification { r: String, r_prime: String },
    #[error("no schedule found within {0} refinement steps")]
    DepthExhausted(u32),
    #[error("certificate rejected at step {step}: {msg}")]
    Rejected { step: usize, msg: String },
}

/// The parameter `r ∈ (1, ∞]` of `L(F_r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FreeParam {
    Finite(Rational),
    Infinite,
}

impl FreeParam {
    pub fn new(r: Rational) -> Result<Self, CalcError> {
        if r <= Rational::one() {
            return Err(CalcError::ParamOutOfRange(fmt_rational(&r)));
        }
        Ok(FreeParam::Finite(r))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            FreeParam::Finite(r) => Some(r),
            FreeParam::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, FreeParam::Infinite)
    }
}

impl fmt::Display for FreeParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreeParam::Finite(r) => f.write_str(&fmt_rational(r)),
            FreeParam::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for FreeParam {
    type Err = CalcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "inf" || t == "infinity" || t == "∞" {
            return Ok(FreeParam::Infinite);
        }
        let r = parse_rational(t).map_err(|_| CalcError::Parse { pos: 0, msg: format!("bad number {t:?}") })?;
        FreeParam::new(r)
    }
}

impl Serialize for FreeParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FreeParam {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `L(F_r)_γ = L(F(1 + (r − 1)/γ²))`, with `∞` fixed.
pub fn compress_rule(r: &FreeParam, gsq: &Rational) -> Result<FreeParam, CalcError> {
    if !gsq.is_positive() {
        return Err(CalcError::NonPositiveCompression(fmt_rational(gsq)));
    }
    Ok(match r {
        FreeParam::Finite(r) => FreeParam::Finite(Rational::one() + (r - Rational::one()) / gsq),
        FreeParam::Infinite => FreeParam::Infinite,
    })
}

/// `L(F_r) * L(F_r') = L(F_{r + r'})`, with `∞` absorbing.
pub fn free_product_rule(r: &FreeParam, r_prime: &FreeParam) -> FreeParam {
    match (r, r_prime) {
        (FreeParam::Finite(a), FreeParam::Finite(b)) => FreeParam::Finite(a + b),
        _ => FreeParam::Infinite,
    }
}

pub(crate) fn positive(gsq: &Rational) -> Result<(), CalcError> {
    if gsq.is_positive() {
        Ok(())
    } else {
        Err(CalcError::NonPositiveCompression(fmt_rational(gsq)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn lf(n: i64, d: i64) -> FreeParam {
        FreeParam::new(rat(n, d)).unwrap()
    }

    #[test]
    fn rule_examples() {
        assert_eq!(compress_rule(&lf(2, 1), &rat(1, 4)).unwrap(), lf(5, 1));
        assert_eq!(compress_rule(&lf(5, 1), &int(4)).unwrap(), lf(2, 1));
        assert_eq!(compress_rule(&FreeParam::Infinite, &rat(3, 7)).unwrap(), FreeParam::Infinite);
        assert!(compress_rule(&lf(2, 1), &int(0)).is_err());
        assert_eq!(free_product_rule(&lf(2, 1), &lf(3, 1)), lf(5, 1));
        assert_eq!(free_product_rule(&lf(3, 2), &lf(3, 2)), lf(3, 1));
        assert_eq!(free_product_rule(&lf(2, 1), &FreeParam::Infinite), FreeParam::Infinite);
    }

    #[test]
    fn param_range() {
        assert!(FreeParam::new(int(1)).is_err());
        assert!(FreeParam::new(rat(1, 2)).is_err());
        assert_eq!("7/4".parse::<FreeParam>().unwrap(), lf(7, 4));
        assert_eq!("inf".parse::<FreeParam>().unwrap(), FreeParam::Infinite);
        assert_eq!(lf(7, 4).to_string(), "7/4");
        let json = serde_json::to_string(&lf(7, 4)).unwrap();
        assert_eq!(json, "\"7/4\"");
        assert_eq!(serde_json::from_str::<FreeParam>(&json).unwrap(), lf(7, 4));
    }
}
