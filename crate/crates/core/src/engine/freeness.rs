use serde::Serialize;

use super::expr::ElementExpr;
use super::law::GeneratorLaw;
use super::space::FreeSpace;
use super::word::{FreeElement, LegId, Letter, Word};
use super::EngineError;
use crate::scalar::Scalar;

/// A named generator of a family under test.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub name: String,
    pub element: FreeElement,
}

impl FamilyMember {
    pub fn new(name: impl Into<String>, element: FreeElement) -> Self {
        FamilyMember { name: name.into(), element }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Blocks as `family:monomial`, e.g. `0:a.a* | 1:b`.
    pub word: String,
    pub trace: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreenessReport {
    pub max_degree: usize,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl FreenessReport {
    pub fn is_free(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every alternating product of centered family monomials with at
/// most `max_degree` generators in total and reports nonvanishing traces.
///
/// Families are closed under adjoints first, so this tests *-freeness.
/// Centering is relative to the space's unit, so compressed spaces work too.
pub fn check_freeness(
    space: &FreeSpace,
    families: &[Vec<FamilyMember>],
    max_degree: usize,
) -> Result<FreenessReport, EngineError> {
    let mut closed: Vec<Vec<FamilyMember>> = Vec::with_capacity(families.len());
    for family in families {
        let mut members: Vec<FamilyMember> = Vec::new();
        for m in family {
            let adj = space.adjoint(&m.element)?;
            let self_adjoint = space.elements_equal(&adj, &m.element)?;
            members.push(m.clone());
            if !self_adjoint {
                members.push(FamilyMember::new(format!("{}*", m.name), adj));
            }
        }
        closed.push(members);
    }

    // centered monomials per family and length
    let mut blocks: Vec<Vec<Vec<(String, FreeElement)>>> = Vec::with_capacity(closed.len());
    for members in &closed {
        let mut by_len: Vec<Vec<(String, FreeElement)>> = vec![Vec::new(); max_degree + 1];
        let mut frontier: Vec<(String, FreeElement)> = vec![(String::new(), space.unit())];
        for len in 1..=max_degree {
            let mut next = Vec::new();
            for (name, elem) in &frontier {
                for m in members {
                    let label = if name.is_empty() { m.name.clone() } else { format!("{name}.{}", m.name) };
                    next.push((label, space.simplify(&elem.mul(&m.element))?));
                }
            }
            for (name, elem) in &next {
                by_len[len].push((name.clone(), space.simplify(&space.center_element(elem)?)?));
            }
            frontier = next;
        }
        blocks.push(by_len);
    }

    let mut report = FreenessReport { max_degree, checked: 0, violations: Vec::new() };
    let mut path: Vec<(usize, usize, usize)> = Vec::new();
    search(space, &blocks, max_degree, &mut path, &mut report)?;
    Ok(report)
}

fn search(
    space: &FreeSpace,
    blocks: &[Vec<Vec<(String, FreeElement)>>],
    remaining: usize,
    path: &mut Vec<(usize, usize, usize)>,
    report: &mut FreenessReport,
) -> Result<(), EngineError> {
    if !path.is_empty() {
        let mut product = space.unit();
        let mut labels = Vec::with_capacity(path.len());
        for &(f, len, k) in path.iter() {
            let (label, elem) = &blocks[f][len][k];
            product = space.simplify(&product.mul(elem))?;
            labels.push(format!("{f}:{label}"));
        }
        let t = space.trace(&product)?;
        report.checked += 1;
        if !t.is_zero() {
            report.violations.push(Violation { word: labels.join(" | "), trace: t });
        }
    }
    for f in 0..blocks.len() {
        if path.last().is_some_and(|&(last, _, _)| last == f) {
            continue;
        }
        for len in 1..=remaining {
            for k in 0..blocks[f][len].len() {
                path.push((f, len, k));
                search(space, blocks, remaining - len, path, report)?;
                path.pop();
            }
        }
    }
    Ok(())
}

/// The word `e_{1i} X e_{j1}` built from a matrix-units leg and a generator leg.
pub fn matrix_compression_family(
    space: &FreeSpace,
    units: LegId,
    generator: LegId,
    i: usize,
    j: usize,
) -> Result<Word, EngineError> {
    let n = match space.law(units)? {
        GeneratorLaw::MatrixUnits { n } => *n,
        _ => return Err(EngineError::InvalidLaw("expected a matrix-units leg".into())),
    };
    for idx in [i, j] {
        if idx == 0 || idx > n {
            return Err(EngineError::IndexOutOfRange { index: idx, n });
        }
    }
    if space.law(generator)?.atom_count() == 0 {
        return Err(EngineError::InvalidLaw("generator leg has no generators".into()));
    }
    Ok(Word::new(vec![
        Letter::atom(units, GeneratorLaw::matrix_unit(n, 1, i)),
        Letter::new(generator, ElementExpr::atom(0)),
        Letter::atom(units, GeneratorLaw::matrix_unit(n, j, 1)),
    ]))
}

/// The corner `e_{11} M e_{11}` with trace `n·τ`.
pub fn matrix_corner(space: &FreeSpace, units: LegId) -> Result<FreeSpace, EngineError> {
    let n = match space.law(units)? {
        GeneratorLaw::MatrixUnits { n } => *n,
        _ => return Err(EngineError::InvalidLaw("expected a matrix-units leg".into())),
    };
    space.compress(units, &ElementExpr::atom(GeneratorLaw::matrix_unit(n, 1, 1)))
}
