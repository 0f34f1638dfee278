//! Exact traces of words in free families.
//!
//! A [`FreeSpace`] is a finite list of free legs, each with a [`GeneratorLaw`]
//! describing its *-distribution. Words are products of single-leg letters and
//! their traces are computed with the centering recursion of the free product
//! trace: a traveling product of centered letters has trace zero.

mod expr;
mod freeness;
mod law;
mod space;
pub mod text;
mod word;

use thiserror::Error;

pub use expr::{Atom, ElementExpr};
pub use freeness::{
    check_freeness, matrix_compression_family, matrix_corner, FamilyMember,
    FreenessReport, Violation,
};
pub use law::{matrix_algebra, matrix_unit_names, FiniteDimAlgebra, GeneratorLaw};
pub use space::{FreeSpace, Leg, DEFAULT_MAX_DEGREE};
pub use word::{FreeElement, LegId, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown leg `{0}`")]
    UnknownLeg(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate leg id `{0}`")]
    DuplicateLeg(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("element is not a projection on its leg")]
    NotAProjection,
    #[error("projection has trace zero")]
    ZeroTrace,
    #[error("word has {degree} alternating letters, above the bound {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("matrix index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
