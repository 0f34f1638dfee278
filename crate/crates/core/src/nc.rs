//! Noncrossing partitions and closed-form moment references.
//!
//! Everything here is exact rational arithmetic. These functions are the
//! reference values the moment engine, the matrix model and the two-projection
//! model are checked against.

use std::collections::HashMap;

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NcError {
    #[error("moment order must be non-negative, got {0}")]
    NegativeOrder(i64),
    #[error("moment sequence must start with 1")]
    NotNormalized,
}

/// A set partition of `{1..n}` given by its blocks (1-based, each block sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        Partition { n, blocks }
    }

    /// Blocks are disjoint, nonempty and cover `{1..n}`.
    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.n + 1];
        for b in &self.blocks {
            if b.is_empty() {
                return false;
            }
            for &i in b {
                if i == 0 || i > self.n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen[1..].iter().all(|&s| s)
    }

    /// The four-index test: no `a < b < c < d` with `a, c` in one block and
    /// `b, d` in another.
    pub fn is_noncrossing(&self) -> bool {
        let mut owner = vec![usize::MAX; self.n + 1];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                owner[i] = k;
            }
        }
        for a in 1..=self.n {
            for b in a + 1..=self.n {
                if owner[a] == owner[b] {
                    continue;
                }
                for c in b + 1..=self.n {
                    if owner[c] != owner[a] {
                        continue;
                    }
                    for d in c + 1..=self.n {
                        if owner[d] == owner[b] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }
}

/// Moments `m_0, m_1, ..., m_N` with `m_0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSequence {
    values: Vec<Rational>,
}

impl MomentSequence {
    pub fn new(values: Vec<Rational>) -> Result<Self, NcError> {
        match values.first() {
            Some(v) if v.is_one() => Ok(MomentSequence { values }),
            _ => Err(NcError::NotNormalized),
        }
    }

    /// Builds `1, m_1, ..., m_N` from the moments of positive order.
    pub fn from_positive(moments: impl IntoIterator<Item = Rational>) -> Self {
        let mut values = vec![Rational::one()];
        values.extend(moments);
        MomentSequence { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.values.get(k)
    }
}

/// Free cumulants `κ_1, κ_2, ...`; `kappa(k)` is zero past the stored range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeCumulants {
    values: Vec<Rational>,
}

impl FreeCumulants {
    /// `values[0]` is `κ_1`.
    pub fn from_orders(values: Vec<Rational>) -> Self {
        FreeCumulants { values }
    }

    pub fn kappa(&self, k: usize) -> Rational {
        if k == 0 {
            return Rational::zero();
        }
        self.values.get(k - 1).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

pub fn catalan(k: u32) -> BigInt {
    // C_k = binom(2k, k) / (k + 1)
    let mut c = BigInt::one();
    for j in 0..k {
        c = c * BigInt::from(2 * (2 * j + 1)) / BigInt::from(j + 2);
    }
    c
}

/// All noncrossing pair partitions of `{1..n}`; empty for odd `n`.
pub fn enumerate_noncrossing_pairings(n: usize) -> Vec<Partition> {
    if n % 2 == 1 {
        return Vec::new();
    }
    pairings_on(1, n)
        .into_iter()
        .map(|pairs| Partition::new(n, pairs.into_iter().map(|(a, b)| vec![a, b]).collect()))
        .collect()
}

fn pairings_on(lo: usize, hi: usize) -> Vec<Vec<(usize, usize)>> {
    if lo > hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // `lo` pairs with `j`; the interval strictly between has even length
    for j in (lo + 1..=hi).step_by(2) {
        let inner = pairings_on(lo + 1, j - 1);
        let outer = pairings_on(j + 1, hi);
        for a in &inner {
            for b in &outer {
                let mut p = Vec::with_capacity(a.len() + b.len() + 1);
                p.push((lo, j));
                p.extend_from_slice(a);
                p.extend_from_slice(b);
                out.push(p);
            }
        }
    }
    out
}

/// `τ(X^k)` for a centered semicircular of the given variance.
pub fn semicircle_moment(k: i64, variance: &Rational) -> Result<Rational, NcError> {
    if k < 0 {
        return Err(NcError::NegativeOrder(k));
    }
    if k % 2 == 1 {
        return Ok(Rational::zero());
    }
    let half = (k / 2) as u32;
    Ok(Rational::from_integer(catalan(half)) * num::pow(variance.clone(), half as usize))
}

/// A letter of a circular *-word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Star {
    C,
    CStar,
}

/// `τ` of a word in a standard circular element `c = (X₁ + iX₂)/√2` and its
/// adjoint: the number of noncrossing pairings that match every `c` with a `c*`.
pub fn circular_star_moment(word: &[Star]) -> Rational {
    let mut memo = HashMap::new();
    Rational::from_integer(count_circular(word, &mut memo))
}

fn count_circular(word: &[Star], memo: &mut HashMap<Vec<Star>, BigInt>) -> BigInt {
    if word.is_empty() {
        return BigInt::one();
    }
    if word.len() % 2 == 1 {
        return BigInt::zero();
    }
    if let Some(v) = memo.get(word) {
        return v.clone();
    }
    let mut total = BigInt::zero();
    for j in (1..word.len()).step_by(2) {
        if word[j] == word[0] {
            continue;
        }
        let inner = count_circular(&word[1..j], memo);
        if inner.is_zero() {
            continue;
        }
        total += inner * count_circular(&word[j + 1..], memo);
    }
    memo.insert(word.to_vec(), total.clone());
    total
}

/// Coefficients of `M(z)^s` truncated at degree `n`.
fn power_series_powers(moments: &[Rational], n: usize) -> Vec<Vec<Rational>> {
    let mut powers = vec![vec![Rational::zero(); n + 1]];
    powers[0][0] = Rational::one();
    for s in 1..=n {
        let prev = &powers[s - 1];
        let mut next = vec![Rational::zero(); n + 1];
        for (i, a) in prev.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, m) in moments.iter().enumerate().take(n + 1 - i) {
                next[i + j] += a * m;
            }
        }
        powers.push(next);
    }
    powers
}

/// Moments `m_0..m_N` from free cumulants via the noncrossing moment-cumulant
/// relation, evaluated through `m_n = Σ_s κ_s [z^{n-s}] M(z)^s`.
pub fn moments_from_free_cumulants(cumulants: &FreeCumulants, order: usize) -> MomentSequence {
    let mut m = vec![Rational::one()];
    for n in 1..=order {
        let powers = power_series_powers(&m, n);
        let mut value = Rational::zero();
        for s in 1..=n {
            let k = cumulants.kappa(s);
            if k.is_zero() {
                continue;
            }
            // [z^{n-s}] M^s only involves m_0..m_{n-s}, all already known
            value += k * &powers[s][n - s];
        }
        m.push(value);
    }
    MomentSequence { values: m }
}

/// Inverse of [`moments_from_free_cumulants`] up to the sequence's order.
pub fn free_cumulants_from_moments(moments: &MomentSequence) -> FreeCumulants {
    let m = moments.values();
    let order = moments.order();
    let mut kappa: Vec<Rational> = Vec::with_capacity(order);
    for n in 1..=order {
        let powers = power_series_powers(&m[..n], n);
        let mut value = m[n].clone();
        for s in 1..n {
            value -= &kappa[s - 1] * &powers[s][n - s];
        }
        kappa.push(value);
    }
    FreeCumulants { values: kappa }
}

/// Moments of a projection of trace `alpha`: `1, α, α, ...`.
pub fn projection_moments(alpha: &Rational, order: usize) -> MomentSequence {
    MomentSequence::from_positive(std::iter::repeat_n(alpha.clone(), order))
}

pub fn semicircle_moments(variance: &Rational, order: usize) -> MomentSequence {
    MomentSequence::from_positive(
        (1..=order as i64).map(|k| semicircle_moment(k, variance).expect("non-negative order")),
    )
}

pub fn catalan_rational(k: u32) -> Rational {
    Rational::from_integer(catalan(k))
}
