use serde::Serialize;

use super::trig::{PiRational, TrigPoly};
use crate::scalar::Scalar;

/// A 2×2 matrix of trigonometric polynomials in θ.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AngleElement {
    /// Row-major entries.
    pub entries: [TrigPoly; 4],
}

impl AngleElement {
    pub fn new(a: TrigPoly, b: TrigPoly, c: TrigPoly, d: TrigPoly) -> Self {
        AngleElement { entries: [a, b, c, d] }
    }

    pub fn zero() -> Self {
        AngleElement::default()
    }

    pub fn one() -> Self {
        AngleElement::new(TrigPoly::one(), TrigPoly::zero(), TrigPoly::zero(), TrigPoly::one())
    }

    /// A constant matrix.
    pub fn constant(m: [[i64; 2]; 2]) -> Self {
        let c = |v: i64| TrigPoly::constant(Scalar::from_i64(v));
        AngleElement::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]))
    }

    pub fn entry(&self, i: usize, j: usize) -> &TrigPoly {
        &self.entries[2 * i + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TrigPoly::is_zero)
    }

    pub fn add(&self, other: &AngleElement) -> AngleElement {
        AngleElement { entries: std::array::from_fn(|k| self.entries[k].add(&other.entries[k])) }
    }

    pub fn sub(&self, other: &AngleElement) -> AngleElement {
        AngleElement { entries: std::array::from_fn(|k| self.entries[k].sub(&other.entries[k])) }
    }

    pub fn scale(&self, c: &Scalar) -> AngleElement {
        AngleElement { entries: std::array::from_fn(|k| self.entries[k].scale(c)) }
    }

    pub fn mul(&self, other: &AngleElement) -> AngleElement {
        AngleElement {
            entries: std::array::from_fn(|k| {
                let (i, j) = (k / 2, k % 2);
                self.entry(i, 0).mul(other.entry(0, j)).add(&self.entry(i, 1).mul(other.entry(1, j)))
            }),
        }
    }

    pub fn pow(&self, n: usize) -> AngleElement {
        let mut acc = AngleElement::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> AngleElement {
        AngleElement {
            entries: std::array::from_fn(|k| {
                let (i, j) = (k / 2, k % 2);
                self.entry(j, i).conj()
            }),
        }
    }

    /// `½∫ Tr₂(e(θ)) dν(θ)` for the uniform density `2/π`.
    pub fn trace_exact(&self) -> PiRational {
        self.entry(0, 0).add(self.entry(1, 1)).integrate_uniform().scale(&Scalar::ratio(1, 2))
    }
}

/// The generators of the angle model.
#[derive(Debug, Clone)]
pub struct Generators {
    pub p: AngleElement,
    pub q: AngleElement,
    /// Partial isometry from `p` to `1 − p`.
    pub x: AngleElement,
    /// Partial isometry from `q` to `1 − q`.
    pub y: AngleElement,
    /// Rotation by θ, carrying `p` to `q`.
    pub w: AngleElement,
}

pub fn build_generators() -> Generators {
    let c = TrigPoly::cos();
    let s = TrigPoly::sin();
    let p = AngleElement::constant([[1, 0], [0, 0]]);
    let q = AngleElement::new(c.mul(&c), c.mul(&s), c.mul(&s), s.mul(&s));
    let x = AngleElement::constant([[0, 0], [1, 0]]);
    let w = AngleElement::new(c.clone(), s.neg(), s.clone(), c.clone());
    let y = w.mul(&x).mul(&w.adjoint());
    Generators { p, q, x, y, w }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
}

/// Every algebraic identity of the model, checked as an exact zero difference.
pub fn identity_checks(g: &Generators) -> Vec<IdentityCheck> {
    let one = AngleElement::one();
    let Generators { p, q, x, y, w } = g;
    let cs = TrigPoly::cos().mul(&TrigPoly::sin());
    // (1 − p)qp = x·|(1 − p)qp| with |(1 − p)qp| = cos θ sin θ·p ≥ 0 on [0, π/2]
    let abs_xpart = p.mul(&AngleElement::new(cs.clone(), TrigPoly::zero(), TrigPoly::zero(), TrigPoly::zero()));
    let t = one.sub(p).mul(q).mul(p);
    let abs_ypart = w.mul(&abs_xpart).mul(&w.adjoint());
    let checks: Vec<(&str, AngleElement, AngleElement)> = vec![
        ("p^2 = p", p.mul(p), p.clone()),
        ("p* = p", p.adjoint(), p.clone()),
        ("q^2 = q", q.mul(q), q.clone()),
        ("q* = q", q.adjoint(), q.clone()),
        ("w p w* = q", w.mul(p).mul(&w.adjoint()), q.clone()),
        ("w x w* = y", w.mul(x).mul(&w.adjoint()), y.clone()),
        ("x* x = p", x.adjoint().mul(x), p.clone()),
        ("x x* = 1 - p", x.mul(&x.adjoint()), one.sub(p)),
        ("y* y = q", y.adjoint().mul(y), q.clone()),
        ("y y* = 1 - q", y.mul(&y.adjoint()), one.sub(q)),
        ("w* w = 1", w.adjoint().mul(w), one.clone()),
        ("w w* = 1", w.mul(&w.adjoint()), one.clone()),
        ("(1 - p) q p = x |(1 - p) q p|", t.clone(), x.mul(&abs_xpart)),
        ("|(1 - p) q p|^2 = ((1 - p) q p)* (1 - p) q p", abs_xpart.mul(&abs_xpart), t.adjoint().mul(&t)),
        ("w (1 - p) q p w* = y w |(1 - p) q p| w*", w.mul(&t).mul(&w.adjoint()), y.mul(&abs_ypart)),
        ("x* (1 - p) x = p", x.adjoint().mul(&one.sub(p)).mul(x), p.clone()),
    ];
    checks
        .into_iter()
        .map(|(name, lhs, rhs)| IdentityCheck { name: name.to_string(), pass: lhs.sub(&rhs).is_zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_identities_hold() {
        let g = build_generators();
        for check in identity_checks(&g) {
            assert!(check.pass, "{}", check.name);
        }
    }

    #[test]
    fn a_wrong_identity_is_caught() {
        let g = build_generators();
        assert!(!g.x.mul(&g.x.adjoint()).sub(&g.p).is_zero());
        assert!(!g.p.mul(&g.q).sub(&g.q.mul(&g.p)).is_zero());
    }

    #[test]
    fn basic_traces() {
        let g = build_generators();
        assert_eq!(g.p.trace_exact().as_scalar(), Some(&Scalar::ratio(1, 2)));
        assert_eq!(g.p.mul(&g.q).trace_exact().as_scalar(), Some(&Scalar::ratio(1, 4)));
        assert_eq!(g.p.mul(&g.q).pow(2).trace_exact().as_scalar(), Some(&Scalar::ratio(3, 16)));
        // τ(w) = ∫ cos θ dν = 2/π is a genuine 1/π term
        let tw = g.w.trace_exact();
        assert!(tw.rational.is_zero());
        assert_eq!(tw.inv_pi, Scalar::from_i64(2));
    }
}
