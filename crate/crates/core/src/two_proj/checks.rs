use serde::Serialize;

use super::angle::{build_generators, identity_checks, AngleElement, IdentityCheck};
use super::trig::PiRational;
use crate::engine::text::parse_word;
use crate::engine::{ElementExpr, EngineError, FreeSpace, GeneratorLaw, Letter, Word};
use crate::scalar::{rat, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentPair {
    pub n: usize,
    pub engine: Scalar,
    pub integral: PiRational,
    pub pass: bool,
}

fn projection_space(max_degree: usize) -> Result<FreeSpace, EngineError> {
    let mut s = FreeSpace::new().with_max_degree(max_degree);
    s.add_leg_named("P", GeneratorLaw::projection(rat(1, 2)), vec!["p".into()])?;
    s.add_leg_named("Q", GeneratorLaw::projection(rat(1, 2)), vec!["q".into()])?;
    Ok(s)
}

/// `τ((pq)^n)` from the free product trace against the angle integral.
pub fn moment_match(max_n: usize) -> Result<Vec<MomentPair>, EngineError> {
    let space = projection_space(2 * max_n.max(1))?;
    let g = build_generators();
    let pq = g.p.mul(&g.q);
    (1..=max_n)
        .map(|n| {
            let engine = space.trace_word(&parse_word(&space, &format!("(p q)^{n}"))?)?;
            let integral = pq.pow(n).trace_exact();
            let pass = integral.as_scalar() == Some(&engine);
            Ok(MomentPair { n, engine, integral, pass })
        })
        .collect()
}

/// Moments of `pqp` in the corner `pMp`: the engine's compressed trace against
/// `τ(p)⁻¹` times the uniform-angle integral. Agreement for every order is the
/// evidence that the candidate angle density is the right one.
pub fn derive_measure_moments(max_n: usize) -> Result<Vec<MomentPair>, EngineError> {
    let space = projection_space(2 * max_n.max(1) + 1)?;
    let (p_leg, _) = space.generator("p")?;
    let corner = space.compress(p_leg, &ElementExpr::atom(0))?;
    let g = build_generators();
    let pqp = g.p.mul(&g.q).mul(&g.p);
    (1..=max_n)
        .map(|n| {
            let engine = corner.trace_word(&parse_word(&corner, &format!("(p q p)^{n}"))?)?;
            let integral = pqp.pow(n).trace_exact().scale(&Scalar::from_i64(2));
            let pass = integral.as_scalar() == Some(&engine);
            Ok(MomentPair { n, engine, integral, pass })
        })
        .collect()
}

/// An element of the infinite dihedral group generated by the symmetries
/// `s = 2p − 1` and `t = 2q − 1`, as an alternating word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DihedralWord {
    pub starts_with_s: bool,
    pub len: usize,
}

impl DihedralWord {
    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        (0..self.len).map(|k| if (k % 2 == 0) == self.starts_with_s { 's' } else { 't' })
    }

    pub fn name(&self) -> String {
        if self.len == 0 {
            "1".into()
        } else {
            self.letters().collect()
        }
    }

    /// Every word of length ≤ `max_len` (the identity once).
    pub fn all(max_len: usize) -> Vec<DihedralWord> {
        let mut out = vec![DihedralWord { starts_with_s: true, len: 0 }];
        for len in 1..=max_len {
            out.push(DihedralWord { starts_with_s: true, len });
            out.push(DihedralWord { starts_with_s: false, len });
        }
        out
    }

    pub fn inverse(&self) -> DihedralWord {
        // reversal of an alternating word of involutions
        let last_is_s = self.len > 0 && (self.len - 1).is_multiple_of(2) == self.starts_with_s;
        DihedralWord { starts_with_s: if self.len == 0 { true } else { last_is_s }, len: self.len }
    }

    fn angle(&self, s: &AngleElement, t: &AngleElement) -> AngleElement {
        self.letters().fold(AngleElement::one(), |acc, c| acc.mul(if c == 's' { s } else { t }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coefficient {
    pub word: String,
    pub value: PiRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaarPower {
    pub k: usize,
    pub words_checked: usize,
    pub nonzero: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaarReport {
    /// Length bound on the group words in the expansion of `x*`.
    pub truncation: usize,
    /// Group words up to the truncation are orthonormal for the angle trace.
    pub orthonormal_basis: bool,
    /// Coefficients `τ(g⁻¹x*)` of `x*`.
    pub coefficients: Vec<Coefficient>,
    /// The coefficients at `1` and `s` vanish.
    pub excludes_one_and_s: bool,
    pub powers: Vec<HaarPower>,
    /// `(x*u)(x*u)* = x*(1 − p)x = p`, checked in both models.
    pub unitary_on_corner: bool,
    pub pass: bool,
}

/// Shows `τ((x*u)^k) = 0` for `1 ≤ k ≤ max_k`.
///
/// `x*` is expanded over the dihedral group in the angle model; its
/// coefficients at `1` and `s` vanish exactly. The engine then evaluates
/// `τ(g_1 u g_2 u ⋯ g_k u)` for every choice of group words `g_i ∉ {1, s}` of
/// length ≤ `truncation`, in a space with a 2×2 matrix-unit leg (holding `p`,
/// `s` and `u = e21`) free from a trace-½ projection `q`. Since the trace is
/// multilinear, all of these vanishing gives `τ((x*_N u)^k) = 0` for every
/// truncated expansion `x*_N`, whatever its coefficients.
pub fn haar_check_xu(max_k: usize, truncation: usize) -> Result<HaarReport, EngineError> {
    let g = build_generators();
    let one = AngleElement::one();
    let two = Scalar::from_i64(2);
    let s_angle = g.p.scale(&two).sub(&one);
    let t_angle = g.q.scale(&two).sub(&one);
    let x_star = g.x.adjoint();

    let words = DihedralWord::all(truncation);
    let mut orthonormal = true;
    for a in &words {
        for b in &words {
            let gram = a.inverse().angle(&s_angle, &t_angle).mul(&b.angle(&s_angle, &t_angle)).trace_exact();
            let expected = if a == b { Scalar::one() } else { Scalar::zero() };
            orthonormal &= gram.as_scalar() == Some(&expected);
        }
    }
    let coefficients: Vec<Coefficient> = words
        .iter()
        .map(|w| Coefficient {
            word: w.name(),
            value: w.inverse().angle(&s_angle, &t_angle).mul(&x_star).trace_exact(),
        })
        .collect();
    let excludes = coefficients
        .iter()
        .filter(|c| c.word == "1" || c.word == "s")
        .all(|c| c.value == PiRational::zero());

    let mut space = FreeSpace::new().with_max_degree(max_k * (truncation + 2) + 2);
    let a_leg = space.add_leg("A", GeneratorLaw::MatrixUnits { n: 2 })?;
    let q_leg = space.add_leg_named("Q", GeneratorLaw::projection(rat(1, 2)), vec!["q".into()])?;
    let e = |i, j| ElementExpr::atom(GeneratorLaw::matrix_unit(2, i, j));
    let s_letter = Letter::new(a_leg, e(1, 1).sub(&e(2, 2)));
    let t_letter = Letter::new(q_leg, ElementExpr::atom(0).scale(&two).sub(&ElementExpr::one()));
    let u_letter = Letter::new(a_leg, e(2, 1));
    let nontrivial: Vec<Word> = words
        .iter()
        .filter(|w| w.len > 1 || (w.len == 1 && !w.starts_with_s))
        .map(|w| {
            Word::new(
                w.letters().map(|c| if c == 's' { s_letter.clone() } else { t_letter.clone() }).collect(),
            )
        })
        .collect();

    let mut powers = Vec::with_capacity(max_k);
    for k in 1..=max_k {
        let mut checked = 0;
        let mut nonzero = 0;
        let mut index = vec![0usize; k];
        loop {
            let mut word = Word::identity();
            for &i in &index {
                word = word.concat(&nontrivial[i]).concat(&Word::new(vec![u_letter.clone()]));
            }
            checked += 1;
            if !space.trace_word(&word)?.is_zero() {
                nonzero += 1;
            }
            if !advance(&mut index, nontrivial.len()) {
                break;
            }
        }
        powers.push(HaarPower { k, words_checked: checked, nonzero, pass: nonzero == 0 });
    }

    // u u* = 1 − p on the matrix-unit leg, and x*(1 − p)x = p in the angle model
    let law = space.law(a_leg)?;
    let uu_star = law.reduce(&e(2, 1).mul(&e(1, 2)));
    let engine_side = uu_star == law.reduce(&law.one().sub(&e(1, 1)));
    let angle_side = x_star.mul(&one.sub(&g.p)).mul(&g.x) == g.p;
    let unitary_on_corner = engine_side && angle_side;

    let pass = orthonormal && excludes && unitary_on_corner && powers.iter().all(|p| p.pass);
    Ok(HaarReport {
        truncation,
        orthonormal_basis: orthonormal,
        coefficients,
        excludes_one_and_s: excludes,
        powers,
        unitary_on_corner,
        pass,
    })
}

fn advance(index: &mut [usize], base: usize) -> bool {
    for slot in index.iter_mut() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoProjReport {
    pub schema: String,
    pub identities: Vec<IdentityCheck>,
    pub moments: Vec<MomentPair>,
    pub corner_moments: Vec<MomentPair>,
    pub haar: HaarReport,
    pub pass: bool,
}

pub fn two_projection_report(max_n: usize, haar_k: usize) -> Result<TwoProjReport, EngineError> {
    let identities = identity_checks(&build_generators());
    let moments = moment_match(max_n)?;
    let corner_moments = derive_measure_moments(max_n)?;
    let haar = haar_check_xu(haar_k, 4)?;
    let pass = identities.iter().all(|c| c.pass)
        && moments.iter().all(|m| m.pass)
        && corner_moments.iter().all(|m| m.pass)
        && haar.pass;
    Ok(TwoProjReport {
        schema: crate::engine::text::SCHEMA.to_string(),
        identities,
        moments,
        corner_moments,
        haar,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_agree() {
        let rows = moment_match(6).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        assert_eq!(rows[0].engine, Scalar::ratio(1, 4));
        assert_eq!(rows[1].engine, Scalar::ratio(3, 16));
    }

    #[test]
    fn corner_moments_agree() {
        let rows = derive_measure_moments(4).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        assert_eq!(rows[0].engine, Scalar::ratio(1, 2));
        assert_eq!(rows[1].engine, Scalar::ratio(3, 8));
    }

    #[test]
    fn dihedral_inverse() {
        let w = DihedralWord { starts_with_s: true, len: 2 };
        assert_eq!(w.name(), "st");
        assert_eq!(w.inverse().name(), "ts");
        let w = DihedralWord { starts_with_s: false, len: 3 };
        assert_eq!(w.inverse().name(), "tst");
    }

    #[test]
    fn haar_small() {
        let r = haar_check_xu(2, 3).unwrap();
        assert!(r.orthonormal_basis);
        assert!(r.excludes_one_and_s);
        assert!(r.unitary_on_corner);
        assert!(r.pass);
        // x* is genuinely spread over the group: τ(t x*) = 1/π
        let t = r.coefficients.iter().find(|c| c.word == "t").unwrap();
        assert_eq!(t.value, PiRational::new(Scalar::zero(), Scalar::one()));
    }
}
