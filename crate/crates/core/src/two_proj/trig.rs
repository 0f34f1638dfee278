use std::fmt;

use num::One;
use serde::{Serialize, Serializer};

use crate::scalar::{Rational, Scalar};

/// A trigonometric polynomial on `[0, π/2]` in the canonical form
/// `A(cos θ) + sin θ·B(cos θ)`.
///
/// `sin² = 1 − cos²` is eliminated on multiplication, so two polynomials are
/// equal as functions exactly when their coefficient lists agree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigPoly {
    /// `even[a]` multiplies `cos^a θ`.
    even: Vec<Scalar>,
    /// `odd[a]` multiplies `sin θ·cos^a θ`.
    odd: Vec<Scalar>,
}

fn trim(v: &mut Vec<Scalar>) {
    while v.last().is_some_and(Scalar::is_zero) {
        v.pop();
    }
}

fn add_into(dst: &mut Vec<Scalar>, src: &[Scalar], c: &Scalar, shift: usize) {
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, Scalar::zero());
    }
    for (k, v) in src.iter().enumerate() {
        if !v.is_zero() {
            dst[k + shift] += &(v * c);
        }
    }
}

fn poly_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); (a.len() + b.len()).saturating_sub(1)];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut t = TrigPoly { even: vec![c], odd: Vec::new() };
        trim(&mut t.even);
        t
    }

    pub fn one() -> Self {
        TrigPoly::constant(Scalar::one())
    }

    pub fn cos() -> Self {
        TrigPoly { even: vec![Scalar::zero(), Scalar::one()], odd: Vec::new() }
    }

    pub fn sin() -> Self {
        TrigPoly { even: Vec::new(), odd: vec![Scalar::one()] }
    }

    /// `c·cos^a θ·sin^b θ`.
    pub fn monomial(c: Scalar, a: usize, b: usize) -> Self {
        let mut t = TrigPoly::constant(c);
        for _ in 0..a {
            t = t.mul(&TrigPoly::cos());
        }
        for _ in 0..b {
            t = t.mul(&TrigPoly::sin());
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        add_into(&mut out.even, &other.even, &Scalar::one(), 0);
        add_into(&mut out.odd, &other.odd, &Scalar::one(), 0);
        trim(&mut out.even);
        trim(&mut out.odd);
        out
    }

    pub fn scale(&self, c: &Scalar) -> TrigPoly {
        let mut out = TrigPoly {
            even: self.even.iter().map(|v| v * c).collect(),
            odd: self.odd.iter().map(|v| v * c).collect(),
        };
        trim(&mut out.even);
        trim(&mut out.odd);
        out
    }

    pub fn neg(&self) -> TrigPoly {
        self.scale(&-Scalar::one())
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut even = poly_mul(&self.even, &other.even);
        let mut odd = poly_mul(&self.even, &other.odd);
        add_into(&mut odd, &poly_mul(&self.odd, &other.even), &Scalar::one(), 0);
        // sin²·B1B2 = (1 − cos²)·B1B2
        let bb = poly_mul(&self.odd, &other.odd);
        add_into(&mut even, &bb, &Scalar::one(), 0);
        add_into(&mut even, &bb, &-Scalar::one(), 2);
        let mut out = TrigPoly { even, odd };
        trim(&mut out.even);
        trim(&mut out.odd);
        out
    }

    /// Complex conjugate (θ is real).
    pub fn conj(&self) -> TrigPoly {
        TrigPoly {
            even: self.even.iter().map(Scalar::conj).collect(),
            odd: self.odd.iter().map(Scalar::conj).collect(),
        }
    }

    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, v) in self.even.iter().enumerate() {
            let (a, b) = v.to_f64_pair();
            re += a * c.powi(k as i32);
            im += b * c.powi(k as i32);
        }
        for (k, v) in self.odd.iter().enumerate() {
            let (a, b) = v.to_f64_pair();
            re += a * s * c.powi(k as i32);
            im += b * s * c.powi(k as i32);
        }
        (re, im)
    }

    /// Exact integral against the uniform probability density `2/π` on `[0, π/2]`.
    pub fn integrate_uniform(&self) -> PiRational {
        let mut out = PiRational::zero();
        for (a, c) in self.even.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&cos_integral(a).scale(c));
            }
        }
        for (a, c) in self.odd.iter().enumerate() {
            if !c.is_zero() {
                // (2/π)·∫ sin cos^a = (2/π)/(a+1)
                let r = Rational::new(2.into(), (a as i64 + 1).into());
                out = out.add(&PiRational::new(Scalar::zero(), Scalar::real(r)).scale(c));
            }
        }
        out
    }
}

/// `(2/π)∫_0^{π/2} cos^a θ dθ`: Wallis' `(a−1)!!/a!!`, with a `2/π` factor
/// for odd `a`.
fn cos_integral(a: usize) -> PiRational {
    let mut r = Rational::one();
    let mut k = a as i64;
    while k >= 2 {
        r *= Rational::new((k - 1).into(), k.into());
        k -= 2;
    }
    if a.is_multiple_of(2) {
        PiRational::new(Scalar::real(r), Scalar::zero())
    } else {
        PiRational::new(Scalar::zero(), Scalar::real(r * Rational::from_integer(2.into())))
    }
}

/// An element `a + b/π` with `a, b` Gaussian rationals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PiRational {
    pub rational: Scalar,
    pub inv_pi: Scalar,
}

impl PiRational {
    pub fn new(rational: Scalar, inv_pi: Scalar) -> Self {
        PiRational { rational, inv_pi }
    }

    pub fn zero() -> Self {
        PiRational::default()
    }

    pub fn add(&self, other: &PiRational) -> PiRational {
        PiRational::new(&self.rational + &other.rational, &self.inv_pi + &other.inv_pi)
    }

    pub fn scale(&self, c: &Scalar) -> PiRational {
        PiRational::new(&self.rational * c, &self.inv_pi * c)
    }

    /// The value when no `1/π` term is present.
    pub fn as_scalar(&self) -> Option<&Scalar> {
        self.inv_pi.is_zero().then_some(&self.rational)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        let pi = std::f64::consts::PI;
        let (a, b) = self.rational.to_f64_pair();
        let (c, d) = self.inv_pi.to_f64_pair();
        (a + c / pi, b + d / pi)
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.inv_pi.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "({})/pi", self.inv_pi),
            (false, false) => write!(f, "{} + ({})/pi", self.rational, self.inv_pi),
        }
    }
}

impl Serialize for PiRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn quadrature(t: &TrigPoly) -> f64 {
        // midpoint rule, only as an independent sanity check
        let steps = 20_000;
        let h = std::f64::consts::FRAC_PI_2 / steps as f64;
        let mut acc = 0.0;
        for k in 0..steps {
            acc += t.eval((k as f64 + 0.5) * h).0;
        }
        acc * h * 2.0 / std::f64::consts::PI
    }

    #[test]
    fn pythagoras_is_built_in() {
        let c = TrigPoly::cos();
        let s = TrigPoly::sin();
        assert_eq!(c.mul(&c).add(&s.mul(&s)), TrigPoly::one());
        assert_eq!(TrigPoly::monomial(Scalar::one(), 0, 2), TrigPoly::one().sub(&c.mul(&c)));
    }

    #[test]
    fn wallis_values() {
        assert_eq!(TrigPoly::one().integrate_uniform().as_scalar(), Some(&Scalar::one()));
        let c2 = TrigPoly::monomial(Scalar::one(), 2, 0);
        assert_eq!(c2.integrate_uniform().as_scalar(), Some(&Scalar::ratio(1, 2)));
        let c4 = TrigPoly::monomial(Scalar::one(), 4, 0);
        assert_eq!(c4.integrate_uniform().as_scalar(), Some(&Scalar::ratio(3, 8)));
        let c6 = TrigPoly::monomial(Scalar::one(), 6, 0);
        assert_eq!(c6.integrate_uniform().as_scalar(), Some(&Scalar::real(rat(5, 16))));
        let c1 = TrigPoly::cos().integrate_uniform();
        assert_eq!(c1.inv_pi, Scalar::from_i64(2));
        assert!(c1.rational.is_zero());
    }

    #[test]
    fn exact_integrals_match_quadrature() {
        for (a, b) in [(0, 1), (1, 0), (3, 1), (2, 3), (5, 2), (0, 4)] {
            let t = TrigPoly::monomial(Scalar::one(), a, b);
            let exact = t.integrate_uniform().to_f64_pair().0;
            assert!((exact - quadrature(&t)).abs() < 1e-7, "cos^{a} sin^{b}");
        }
    }
}
