use num::{One, Signed};
use serde::Serialize;

use super::{compress_rule, CalcError, FreeParam};
use crate::scalar::{fmt_rational, int, rational_text, Rational};

/// An assumed or derived isomorphism `L(F_left) ≅ L(F_right)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Identification {
    #[serde(with = "rational_text")]
    pub left: Rational,
    #[serde(with = "rational_text")]
    pub right: Rational,
}

impl Identification {
    pub fn new(left: Rational, right: Rational) -> Self {
        Identification { left, right }
    }

    /// Compression of both sides: `a → 1 + (a − 1)·t`.
    pub fn scale(&self, t: &Rational) -> Self {
        let f = |a: &Rational| Rational::one() + (a - Rational::one()) * t;
        Identification::new(f(&self.left), f(&self.right))
    }

    /// A common free factor `L(F_s)` on both sides.
    pub fn add(&self, s: &Rational) -> Self {
        Identification::new(&self.left + s, &self.right + s)
    }

    pub fn flip(&self) -> Self {
        Identification::new(self.right.clone(), self.left.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Justification {
    /// The hypothesis `L(F_r) ≅ L(F_r')`.
    Assumption,
    /// Compression by `γ² = 1/t` on both sides of fact `from`.
    Scale {
        from: usize,
        #[serde(with = "rational_text")]
        t: Rational,
    },
    /// Free product with `L(F_s)`, `s > 1`, on both sides of fact `from`.
    Add {
        from: usize,
        #[serde(with = "rational_text")]
        s: Rational,
    },
    Symmetry { from: usize },
    /// `first.right == second.left`.
    Transitivity { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DichotomyStep {
    pub fact: Identification,
    pub by: Justification,
}

/// Derives `L(F_r) ≅ L(F_r)_γ` from `L(F_r) ≅ L(F_r')`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DichotomyCertificate {
    #[serde(with = "rational_text")]
    pub r: Rational,
    #[serde(with = "rational_text")]
    pub r_prime: Rational,
    #[serde(with = "rational_text")]
    pub gsq: Rational,
    pub target: Identification,
    pub steps: Vec<DichotomyStep>,
}

const MAX_REFINEMENT: u32 = 64;

struct Builder {
    steps: Vec<DichotomyStep>,
}

impl Builder {
    fn push(&mut self, fact: Identification, by: Justification) -> usize {
        self.steps.push(DichotomyStep { fact, by });
        self.steps.len() - 1
    }

    fn fact(&self, i: usize) -> &Identification {
        &self.steps[i].fact
    }

    fn scale(&mut self, from: usize, t: Rational) -> usize {
        let fact = self.fact(from).scale(&t);
        self.push(fact, Justification::Scale { from, t })
    }

    fn add(&mut self, from: usize, s: Rational) -> usize {
        let fact = self.fact(from).add(&s);
        self.push(fact, Justification::Add { from, s })
    }

    fn trans(&mut self, first: usize, second: usize) -> usize {
        let fact = Identification::new(self.fact(first).left.clone(), self.fact(second).right.clone());
        self.push(fact, Justification::Transitivity { first, second })
    }

    /// From the assumption `(1 + u, 1 + ρu)` (fact 0), the fact `(1 + u, 1 + μu)`
    /// for `1 < μ < ρ`: scale to `(1 + x, 1 + ρx)`, add `2`, then scale back,
    /// where `x = 2(μ − 1)/(ρ − μ)` makes the ratio of the shifted sides `μ`.
    fn ratio(&mut self, u: &Rational, rho: &Rational, mu: &Rational) -> usize {
        let two = int(2);
        let x = &two * (mu - Rational::one()) / (rho - mu);
        let a = self.scale(0, &x / u);
        let b = self.add(a, two.clone());
        self.scale(b, u / (x + two))
    }
}

/// `1 + (ρ − 1)(1 − 2^{−j})`, which increases to `ρ`.
fn approach(rho: &Rational, j: u32) -> Rational {
    let eps = Rational::new(1.into(), num::pow(num::BigInt::from(2), j as usize));
    Rational::one() + (rho - Rational::one()) * (Rational::one() - eps)
}

/// A certificate that `L(F_r) ≅ L(F_r')` with `r < r'` forces
/// `L(F_r) ≅ L(F(1 + (r − 1)/γ²))`, using only compression and addition on
/// both sides together with symmetry and transitivity.
///
/// Writing `u = r − 1` and `ρ = (r' − 1)/u`, every ratio `μ ∈ (1, ρ)` is
/// reachable in three steps, and `λ = 1/γ²` is a product of such ratios.
pub fn fundamental_group_derivation(
    r: &FreeParam,
    r_prime: &FreeParam,
    gsq: &Rational,
) -> Result<DichotomyCertificate, CalcError> {
    let bad = || CalcError::BadIdentification { r: r.to_string(), r_prime: r_prime.to_string() };
    let (Some(r), Some(rp)) = (r.finite(), r_prime.finite()) else {
        return Err(bad());
    };
    if rp <= r {
        return Err(bad());
    }
    super::positive(gsq)?;
    let target_right = compress_rule(&FreeParam::Finite(r.clone()), gsq)?.finite().expect("finite").clone();
    let target = Identification::new(r.clone(), target_right);
    let mut cert = DichotomyCertificate {
        r: r.clone(),
        r_prime: rp.clone(),
        gsq: gsq.clone(),
        target,
        steps: Vec::new(),
    };
    let one = Rational::one();
    if gsq.is_one() {
        return Ok(cert);
    }
    let u = r - &one;
    let rho = (rp - &one) / &u;
    let inverted = *gsq > one;
    // the stretch factor to reach, always > 1
    let lambda = if inverted { gsq.clone() } else { gsq.recip() };

    let mut m = 1u32;
    let mut power = rho.clone();
    while lambda >= power {
        power *= &rho;
        m += 1;
    }
    let mut factors = Vec::new();
    if m > 1 {
        let mut chosen = None;
        for j in 1..=MAX_REFINEMENT {
            let mu = approach(&rho, j);
            if num::pow(mu.clone(), (m - 1) as usize) * &rho > lambda {
                chosen = Some(mu);
                break;
            }
        }
        let mu = chosen.ok_or(CalcError::DepthExhausted(MAX_REFINEMENT))?;
        let last = &lambda / num::pow(mu.clone(), (m - 1) as usize);
        factors.extend(std::iter::repeat_n(mu, (m - 1) as usize));
        factors.push(last);
    } else {
        factors.push(lambda.clone());
    }

    let mut b = Builder { steps: Vec::new() };
    b.push(Identification::new(r.clone(), rp.clone()), Justification::Assumption);
    let mut cache: Vec<(Rational, usize)> = Vec::new();
    let mut current: Option<(usize, Rational)> = None;
    for mu in factors {
        let base = match cache.iter().find(|(v, _)| *v == mu) {
            Some(&(_, i)) => i,
            None => {
                let i = b.ratio(&u, &rho, &mu);
                cache.push((mu.clone(), i));
                i
            }
        };
        current = Some(match current {
            None => (base, mu),
            Some((fact, product)) => {
                let shifted = b.scale(base, product.clone());
                (b.trans(fact, shifted), product * mu)
            }
        });
    }
    let (fact, _) = current.expect("at least one factor");
    if inverted {
        // (r, 1 + λu) scaled by 1/λ is (1 + u/λ, r)
        let s = b.scale(fact, lambda.recip());
        let fact = b.fact(s).flip();
        b.push(fact, Justification::Symmetry { from: s });
    }
    cert.steps = b.steps;
    verify_certificate(&cert)?;
    Ok(cert)
}

/// Replays a certificate step by step.
pub fn verify_certificate(cert: &DichotomyCertificate) -> Result<(), CalcError> {
    let one = Rational::one();
    let reject = |step: usize, msg: String| Err(CalcError::Rejected { step, msg });
    if cert.r <= one || cert.r_prime <= cert.r {
        return reject(0, "need 1 < r < r'".into());
    }
    if !cert.gsq.is_positive() {
        return reject(0, "gsq must be positive".into());
    }
    let expected = Rational::one() + (&cert.r - &one) / &cert.gsq;
    if cert.target != Identification::new(cert.r.clone(), expected) {
        return reject(0, "target is not L(F_r) = L(F_r)_gamma".into());
    }
    for (k, step) in cert.steps.iter().enumerate() {
        let earlier = |i: usize| -> Result<&Identification, CalcError> {
            if i < k {
                Ok(&cert.steps[i].fact)
            } else {
                Err(CalcError::Rejected { step: k, msg: format!("refers to step {i}, not an earlier one") })
            }
        };
        let derived = match &step.by {
            Justification::Assumption => Identification::new(cert.r.clone(), cert.r_prime.clone()),
            Justification::Scale { from, t } => {
                if !t.is_positive() {
                    return reject(k, format!("scale factor {} is not positive", fmt_rational(t)));
                }
                earlier(*from)?.scale(t)
            }
            Justification::Add { from, s } => {
                if *s <= one {
                    return reject(k, format!("added parameter {} is not above 1", fmt_rational(s)));
                }
                earlier(*from)?.add(s)
            }
            Justification::Symmetry { from } => earlier(*from)?.flip(),
            Justification::Transitivity { first, second } => {
                let (a, b) = (earlier(*first)?, earlier(*second)?);
                if a.right != b.left {
                    return reject(k, "middle terms differ".into());
                }
                Identification::new(a.left.clone(), b.right.clone())
            }
        };
        if derived != step.fact {
            return reject(
                k,
                format!(
                    "claims {} = {}, rule gives {} = {}",
                    fmt_rational(&step.fact.left),
                    fmt_rational(&step.fact.right),
                    fmt_rational(&derived.left),
                    fmt_rational(&derived.right)
                ),
            );
        }
    }
    match cert.steps.last() {
        None if cert.target.left == cert.target.right => Ok(()),
        None => reject(0, "empty certificate for a nontrivial target".into()),
        Some(last) if last.fact == cert.target => Ok(()),
        Some(_) => reject(cert.steps.len() - 1, "last fact is not the target".into()),
    }
}
