use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{BigInt, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{CalcError, FreeParam};
use crate::scalar::{fmt_rational, int, rational_text, Rational};

/// Digit counts `c_k` with `r − 1 = Σ c_k·4^{−k}`: `c_0 ∈ N`, `c_k ∈ {0..3}`
/// for `k ≥ 1`, and no tail of threes, i.e. `Σ_{j>k} c_j 4^{−j} < 4^{−k}`
/// for every `k`.
///
/// `digits` holds `c_1..c_m`; a non-empty `period` repeats forever after it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StandardForm {
    #[serde(serialize_with = "big_text")]
    pub c0: BigInt,
    pub digits: Vec<u8>,
    pub period: Vec<u8>,
}

fn big_text<S: serde::Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

fn quarter_pow(k: usize) -> Rational {
    Rational::new(BigInt::one(), num::pow(BigInt::from(4), k))
}

impl StandardForm {
    /// `c_k`.
    pub fn digit(&self, k: usize) -> BigInt {
        if k == 0 {
            return self.c0.clone();
        }
        let i = k - 1;
        let d = if i < self.digits.len() {
            self.digits[i]
        } else if self.period.is_empty() {
            0
        } else {
            self.period[(i - self.digits.len()) % self.period.len()]
        };
        BigInt::from(d)
    }

    pub fn is_terminating(&self) -> bool {
        self.period.is_empty()
    }

    /// `Σ c_k 4^{−k}`, exactly.
    pub fn value(&self) -> Rational {
        let mut v = Rational::from_integer(self.c0.clone());
        for (i, &d) in self.digits.iter().enumerate() {
            v += quarter_pow(i + 1) * int(d as i64);
        }
        if !self.period.is_empty() {
            let p = self.period.len();
            let q: Rational =
                self.period.iter().enumerate().map(|(j, &d)| quarter_pow(j + 1) * int(d as i64)).sum();
            v += quarter_pow(self.digits.len()) * q / (Rational::one() - quarter_pow(p));
        }
        v
    }

    pub fn r(&self) -> Rational {
        self.value() + Rational::one()
    }

    /// Every `c_k` for `k ≥ 1` lies in `{0..3}`.
    pub fn digits_in_range(&self) -> bool {
        !self.c0.is_negative() && self.digits.iter().chain(&self.period).all(|&d| d <= 3)
    }

    /// `Σ_{j>k} c_j 4^{−j} < 4^{−k}` for every `k ≥ 0`; past the prefix the
    /// tails repeat, so one period suffices.
    pub fn tail_condition(&self) -> bool {
        let total = self.value();
        let mut head = Rational::from_integer(self.c0.clone());
        let horizon = self.digits.len() + self.period.len();
        for k in 0..=horizon {
            if k > 0 {
                head += quarter_pow(k) * Rational::from_integer(self.digit(k));
            }
            let tail = &total - &head;
            if tail >= quarter_pow(k) {
                return false;
            }
        }
        true
    }

    /// Nonzero digits with their levels.
    pub fn support(&self) -> Vec<(usize, BigInt)> {
        let mut out = Vec::new();
        if !self.c0.is_zero() {
            out.push((0, self.c0.clone()));
        }
        for (i, &d) in self.digits.iter().enumerate() {
            if d != 0 {
                out.push((i + 1, BigInt::from(d)));
            }
        }
        out
    }
}

impl fmt::Display for StandardForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.support().into_iter().map(|(k, c)| format!("c{k}={c}")).collect();
        if parts.is_empty() && self.period.is_empty() {
            f.write_str("0")?;
        } else {
            f.write_str(&parts.join(", "))?;
        }
        if !self.period.is_empty() {
            let start = self.digits.len() + 1;
            let rep: Vec<String> = self.period.iter().map(|d| d.to_string()).collect();
            if !parts.is_empty() {
                f.write_str(", ")?;
            }
            write!(f, "repeating from c{start}: ({})", rep.join(" "))?;
        }
        Ok(())
    }
}

/// Greedy base-4 expansion of `r − 1`, with cycle detection for the
/// eventually periodic case.
pub fn standard_form(r: &FreeParam) -> Result<StandardForm, CalcError> {
    let r = r.finite().ok_or(CalcError::InfiniteStandardForm)?;
    let u = r - Rational::one();
    let c0 = u.floor().to_integer();
    let mut rem = u - Rational::from_integer(c0.clone());
    let mut digits: Vec<u8> = Vec::new();
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let four = int(4);
    while !rem.is_zero() {
        if let Some(&start) = seen.get(&rem) {
            let period = digits.split_off(start);
            return Ok(StandardForm { c0, digits, period });
        }
        seen.insert(rem.clone(), digits.len());
        let scaled = &rem * &four;
        let d = scaled.floor();
        digits.push(d.to_integer().to_u8().expect("digit below 4"));
        rem = scaled - d;
    }
    Ok(StandardForm { c0, digits, period: Vec::new() })
}

/// A generator `f_k X f_k'` (`k' ≤ k`) of trace weight `2^{−k}·2^{−k'}` in the
/// count `r = 1 + Σ contributions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Item {
    /// `f_k X f_k`, contributing `4^{−k}`.
    Diag { level: u32 },
    /// `f_k X f_k'` with `k' < k`, contributing `2·2^{−k}·2^{−k'}`.
    OffDiag { level: u32, coarser: u32 },
}

impl Item {
    pub fn contribution(&self) -> Rational {
        let half = |k: u32| Rational::new(BigInt::one(), num::pow(BigInt::from(2), k as usize));
        match *self {
            Item::Diag { level } => half(level) * half(level),
            Item::OffDiag { level, coarser } => int(2) * half(level) * half(coarser),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveKind {
    /// One `OffDiag { level, coarser }` becomes `produced = 2^{level−coarser+1}`
    /// diagonal items at `level`.
    Cut { level: u32, coarser: u32, produced: u64 },
    /// Four diagonal items at `level` become one at `level − 1`.
    Paste { level: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Move {
    #[serde(flatten)]
    pub kind: MoveKind,
    #[serde(with = "rational_text")]
    pub sum_before: Rational,
    #[serde(with = "rational_text")]
    pub sum_after: Rational,
    pub preserved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultisetReduction {
    pub traces: Vec<String>,
    #[serde(with = "rational_text")]
    pub r: Rational,
    pub initial: Vec<Item>,
    pub moves: Vec<Move>,
    pub form: StandardForm,
    /// The form equals `standard_form(r)`.
    pub matches_standard_form: bool,
}

impl MultisetReduction {
    pub fn all_moves_preserve(&self) -> bool {
        self.moves.iter().all(|m| m.preserved)
    }
}

/// Binary levels of a dyadic trace in `(0, 1]`; the unit trace is level 0.
fn dyadic_levels(t: &Rational) -> Result<Vec<u32>, CalcError> {
    let bad = || CalcError::NonDyadicTrace(fmt_rational(t));
    if !t.is_positive() || *t > Rational::one() {
        return Err(bad());
    }
    if t.is_one() {
        return Ok(vec![0]);
    }
    let den = t.denom().magnitude();
    if den.count_ones() != 1 {
        return Err(bad());
    }
    let bits = den.trailing_zeros().ok_or_else(bad)? as u32;
    let numer = t.numer().to_biguint().ok_or_else(bad)?;
    // t = numer / 2^bits, and bit i of numer (from the top) sits at level bits − i
    Ok((0..bits).filter(|&i| numer.bit(i as u64)).map(|i| bits - i).rev().collect())
}

struct State {
    diag: BTreeMap<u32, u64>,
}

impl State {
    fn sum(&self, off: &[Item]) -> Rational {
        let d: Rational =
            self.diag.iter().map(|(&level, &c)| Item::Diag { level }.contribution() * int(c as i64)).sum();
        d + off.iter().map(Item::contribution).sum::<Rational>()
    }
}

/// Cuts every off-diagonal generator into diagonal ones, then pastes groups of
/// four from the finest level up, logging the exact contribution sum around
/// each move.
pub fn reduce_multiset(traces: &[Rational]) -> Result<MultisetReduction, CalcError> {
    let mut initial = Vec::new();
    for t in traces {
        let levels = dyadic_levels(t)?;
        for &k in &levels {
            initial.push(Item::Diag { level: k });
        }
        for (a, &k) in levels.iter().enumerate() {
            for &k2 in &levels[..a] {
                initial.push(Item::OffDiag { level: k, coarser: k2 });
            }
        }
    }
    let mut state = State { diag: BTreeMap::new() };
    let mut off: Vec<Item> = Vec::new();
    for item in &initial {
        match *item {
            Item::Diag { level } => *state.diag.entry(level).or_insert(0) += 1,
            off_item => off.push(off_item),
        }
    }
    let start_sum = state.sum(&off);
    let mut moves = Vec::new();

    while let Some(item) = off.pop() {
        let Item::OffDiag { level, coarser } = item else { unreachable!("only off-diagonal items are queued") };
        let before = state.sum(&off) + item.contribution();
        let produced = 1u64 << (level - coarser + 1);
        *state.diag.entry(level).or_insert(0) += produced;
        let after = state.sum(&off);
        moves.push(Move {
            kind: MoveKind::Cut { level, coarser, produced },
            preserved: before == after,
            sum_before: before,
            sum_after: after,
        });
    }
    let finest = state.diag.keys().next_back().copied().unwrap_or(0);
    for level in (1..=finest).rev() {
        while state.diag.get(&level).copied().unwrap_or(0) >= 4 {
            let before = state.sum(&off);
            *state.diag.get_mut(&level).expect("present") -= 4;
            *state.diag.entry(level - 1).or_insert(0) += 1;
            let after = state.sum(&off);
            moves.push(Move { kind: MoveKind::Paste { level }, preserved: before == after, sum_before: before, sum_after: after });
        }
    }

    let c0 = BigInt::from(state.diag.get(&0).copied().unwrap_or(0));
    let mut digits: Vec<u8> =
        (1..=finest).map(|k| state.diag.get(&k).copied().unwrap_or(0) as u8).collect();
    while digits.last() == Some(&0) {
        digits.pop();
    }
    let form = StandardForm { c0, digits, period: Vec::new() };
    let r = Rational::one() + start_sum;
    let matches = match FreeParam::new(r.clone()) {
        Ok(p) => standard_form(&p).map(|s| s == form).unwrap_or(false),
        Err(_) => false,
    };
    Ok(MultisetReduction {
        traces: traces.iter().map(fmt_rational).collect(),
        r,
        initial,
        moves,
        form,
        matches_standard_form: matches,
    })
}
