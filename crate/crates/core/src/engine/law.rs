use num::{One, Signed};

use super::expr::{Atom, ElementExpr};
use super::EngineError;
use crate::nc::{circular_star_moment, semicircle_moment, Star};
use crate::scalar::{Rational, Scalar};

/// A finite-dimensional *-algebra with a trace, given on a basis.
///
/// `table[a][b]` is the product `e_a e_b` as a sparse combination of basis
/// elements, `unit` the coordinates of `1`, `trace[a] = τ(e_a)` and
/// `adjoint[a]` the basis index of `e_a*` (the involution is conjugate-linear).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDimAlgebra {
    pub names: Vec<String>,
    pub table: Vec<Vec<Vec<(usize, Scalar)>>>,
    pub unit: Vec<Scalar>,
    pub trace: Vec<Scalar>,
    pub adjoint: Vec<usize>,
}

impl FiniteDimAlgebra {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    fn product(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim()];
        for (a, ca) in x.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in y.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let c = ca * cb;
                for (k, v) in &self.table[a][b] {
                    out[*k] += &(&c * v);
                }
            }
        }
        out
    }

    fn basis(&self, a: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[a] = Scalar::one();
        v
    }

    fn tau(&self, x: &[Scalar]) -> Scalar {
        let mut t = Scalar::zero();
        for (c, tr) in x.iter().zip(&self.trace) {
            t += &(c * tr);
        }
        t
    }

    /// Checks shape, unit, associativity, normalization, traciality and the involution.
    pub fn validate(&self) -> Result<(), EngineError> {
        let d = self.dim();
        let bad = |m: &str| Err(EngineError::InvalidLaw(m.to_string()));
        if d == 0 {
            return bad("finite-dimensional algebra needs at least one basis element");
        }
        if self.table.len() != d
            || self.table.iter().any(|row| row.len() != d)
            || self.unit.len() != d
            || self.trace.len() != d
            || self.adjoint.len() != d
        {
            return bad("table, unit, trace and adjoint must match the basis size");
        }
        if self.table.iter().flatten().flatten().any(|(k, _)| *k >= d) {
            return bad("multiplication table references an unknown basis index");
        }
        if self.adjoint.iter().any(|&a| a >= d) {
            return bad("adjoint references an unknown basis index");
        }
        for a in 0..d {
            let ea = self.basis(a);
            if self.product(&self.unit, &ea) != ea || self.product(&ea, &self.unit) != ea {
                return bad("unit does not act as identity");
            }
            if self.adjoint[self.adjoint[a]] != a {
                return bad("adjoint is not an involution");
            }
        }
        if !self.tau(&self.unit).is_one() {
            return bad("trace is not normalized: τ(1) ≠ 1");
        }
        for a in 0..d {
            for b in 0..d {
                let ab = self.product(&self.basis(a), &self.basis(b));
                let ba = self.product(&self.basis(b), &self.basis(a));
                if self.tau(&ab) != self.tau(&ba) {
                    return bad("trace is not tracial on basis products");
                }
                for c in 0..d {
                    let left = self.product(&ab, &self.basis(c));
                    let bc = self.product(&self.basis(b), &self.basis(c));
                    if left != self.product(&self.basis(a), &bc) {
                        return bad("multiplication table is not associative");
                    }
                }
            }
        }
        Ok(())
    }
}

/// The *-distribution of one free leg.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorLaw {
    Semicircular { variance: Rational },
    Projection { trace: Rational },
    HaarUnitary,
    Circular,
    FiniteDim(FiniteDimAlgebra),
    MatrixUnits { n: usize },
}

impl GeneratorLaw {
    pub fn semicircular() -> Self {
        GeneratorLaw::Semicircular { variance: Rational::one() }
    }

    pub fn projection(trace: Rational) -> Self {
        GeneratorLaw::Projection { trace }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        match self {
            GeneratorLaw::Semicircular { variance } if !variance.is_positive() => {
                Err(EngineError::InvalidLaw("semicircular variance must be positive".into()))
            }
            GeneratorLaw::Projection { trace }
                if !(trace.is_positive() && *trace < Rational::one()) =>
            {
                Err(EngineError::InvalidLaw("projection trace must lie in (0, 1)".into()))
            }
            GeneratorLaw::MatrixUnits { n: 0 } => {
                Err(EngineError::InvalidLaw("matrix units need n ≥ 1".into()))
            }
            GeneratorLaw::FiniteDim(alg) => alg.validate(),
            _ => Ok(()),
        }
    }

    /// Number of generator atoms.
    pub fn atom_count(&self) -> usize {
        match self {
            GeneratorLaw::Semicircular { .. } | GeneratorLaw::Projection { .. } => 1,
            GeneratorLaw::HaarUnitary | GeneratorLaw::Circular => 2,
            GeneratorLaw::FiniteDim(alg) => alg.dim(),
            GeneratorLaw::MatrixUnits { n } => n * n,
        }
    }

    /// Default generator names, indexed by atom.
    pub fn default_names(&self) -> Vec<String> {
        match self {
            GeneratorLaw::Semicircular { .. } => vec!["X".into()],
            GeneratorLaw::Projection { .. } => vec!["p".into()],
            GeneratorLaw::HaarUnitary => vec!["u".into(), "u*".into()],
            GeneratorLaw::Circular => vec!["c".into(), "c*".into()],
            GeneratorLaw::FiniteDim(alg) => alg.names.clone(),
            GeneratorLaw::MatrixUnits { n } => matrix_unit_names("e", *n),
        }
    }

    pub fn adjoint_atom(&self, a: Atom) -> Atom {
        match self {
            GeneratorLaw::Semicircular { .. } | GeneratorLaw::Projection { .. } => a,
            GeneratorLaw::HaarUnitary | GeneratorLaw::Circular => 1 - a,
            GeneratorLaw::FiniteDim(alg) => alg.adjoint[a as usize] as Atom,
            GeneratorLaw::MatrixUnits { n } => {
                let (i, j) = (a as usize / n, a as usize % n);
                (j * n + i) as Atom
            }
        }
    }

    pub fn matrix_unit(n: usize, i: usize, j: usize) -> Atom {
        ((i - 1) * n + (j - 1)) as Atom
    }

    pub fn adjoint(&self, e: &ElementExpr) -> ElementExpr {
        e.adjoint_with(|a| self.adjoint_atom(a))
    }

    /// The identity in canonical form.
    pub fn one(&self) -> ElementExpr {
        match self {
            GeneratorLaw::FiniteDim(alg) => vector_expr(&alg.unit),
            GeneratorLaw::MatrixUnits { n } => {
                let mut e = ElementExpr::zero();
                for i in 1..=*n {
                    e.add_term(vec![Self::matrix_unit(*n, i, i)], Scalar::one());
                }
                e
            }
            _ => ElementExpr::one(),
        }
    }

    /// Canonical form under the leg's relations.
    pub fn reduce(&self, e: &ElementExpr) -> ElementExpr {
        let mut out = ElementExpr::zero();
        for (m, c) in e.terms() {
            for (rm, rc) in self.reduce_monomial(m) {
                out.add_term(rm, c * &rc);
            }
        }
        out
    }

    fn reduce_monomial(&self, m: &[Atom]) -> Vec<(Vec<Atom>, Scalar)> {
        match self {
            GeneratorLaw::Semicircular { .. } | GeneratorLaw::Circular => {
                vec![(m.to_vec(), Scalar::one())]
            }
            GeneratorLaw::Projection { .. } => {
                let m = if m.is_empty() { vec![] } else { vec![0] };
                vec![(m, Scalar::one())]
            }
            GeneratorLaw::HaarUnitary => {
                let net: i64 = m.iter().map(|&a| if a == 0 { 1 } else { -1 }).sum();
                let atom = if net >= 0 { 0 } else { 1 };
                vec![(vec![atom; net.unsigned_abs() as usize], Scalar::one())]
            }
            GeneratorLaw::MatrixUnits { n } => {
                let Some((&first, rest)) = m.split_first() else {
                    return expr_terms(&self.one());
                };
                let (i, mut j) = (first as usize / n, first as usize % n);
                for &a in rest {
                    let (k, l) = (a as usize / n, a as usize % n);
                    if k != j {
                        return Vec::new();
                    }
                    j = l;
                }
                vec![(vec![(i * n + j) as Atom], Scalar::one())]
            }
            GeneratorLaw::FiniteDim(alg) => {
                let mut v = alg.unit.clone();
                for &a in m {
                    v = alg.product(&v, &alg.basis(a as usize));
                }
                expr_terms(&vector_expr(&v))
            }
        }
    }

    /// The leg's moment functional, linear in `e`.
    pub fn trace(&self, e: &ElementExpr) -> Scalar {
        let mut t = Scalar::zero();
        for (m, c) in e.terms() {
            let v = self.trace_monomial(m);
            if !v.is_zero() {
                t += &(c * &v);
            }
        }
        t
    }

    fn trace_monomial(&self, m: &[Atom]) -> Scalar {
        match self {
            GeneratorLaw::Semicircular { variance } => {
                Scalar::real(semicircle_moment(m.len() as i64, variance).expect("length is non-negative"))
            }
            GeneratorLaw::Projection { trace } => {
                if m.is_empty() {
                    Scalar::one()
                } else {
                    Scalar::real(trace.clone())
                }
            }
            GeneratorLaw::HaarUnitary => {
                let net: i64 = m.iter().map(|&a| if a == 0 { 1 } else { -1 }).sum();
                if net == 0 {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            }
            GeneratorLaw::Circular => {
                let word: Vec<Star> =
                    m.iter().map(|&a| if a == 0 { Star::C } else { Star::CStar }).collect();
                Scalar::real(circular_star_moment(&word))
            }
            GeneratorLaw::MatrixUnits { .. } | GeneratorLaw::FiniteDim(_) => {
                let reduced = self.reduce_monomial(m);
                let mut t = Scalar::zero();
                for (rm, rc) in reduced {
                    t += &(&rc * &self.trace_basis(&rm));
                }
                t
            }
        }
    }

    fn trace_basis(&self, m: &[Atom]) -> Scalar {
        match (self, m) {
            (_, []) => Scalar::one(),
            (GeneratorLaw::MatrixUnits { n }, [a]) => {
                let (i, j) = (*a as usize / n, *a as usize % n);
                if i == j {
                    Scalar::ratio(1, *n as i64)
                } else {
                    Scalar::zero()
                }
            }
            (GeneratorLaw::FiniteDim(alg), [a]) => alg.trace[*a as usize].clone(),
            _ => unreachable!("canonical finite-dimensional monomials have length ≤ 1"),
        }
    }
}

fn vector_expr(v: &[Scalar]) -> ElementExpr {
    let mut e = ElementExpr::zero();
    for (a, c) in v.iter().enumerate() {
        e.add_term(vec![a as Atom], c.clone());
    }
    e
}

fn expr_terms(e: &ElementExpr) -> Vec<(Vec<Atom>, Scalar)> {
    e.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

/// `e11, e12, ...`; indices are separated by `_` once `n ≥ 10`.
pub fn matrix_unit_names(prefix: &str, n: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            if n < 10 {
                names.push(format!("{prefix}{i}{j}"));
            } else {
                names.push(format!("{prefix}{i}_{j}"));
            }
        }
    }
    names
}

/// `M_n` presented as a generic [`FiniteDimAlgebra`].
pub fn matrix_algebra(n: usize) -> FiniteDimAlgebra {
    let d = n * n;
    let idx = |i: usize, j: usize| i * n + j;
    let mut table = vec![vec![Vec::new(); d]; d];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                table[idx(i, j)][idx(j, l)] = vec![(idx(i, l), Scalar::one())];
            }
        }
    }
    let mut unit = vec![Scalar::zero(); d];
    let mut trace = vec![Scalar::zero(); d];
    for i in 0..n {
        unit[idx(i, i)] = Scalar::one();
        trace[idx(i, i)] = Scalar::ratio(1, n as i64);
    }
    let adjoint = (0..d).map(|a| idx(a % n, a / n)).collect();
    FiniteDimAlgebra { names: matrix_unit_names("f", n), table, unit, trace, adjoint }
}
