//! Monte-Carlo matrix model: independent GUE matrices together with
//! block-embedded constant matrices, compared against exact free traces.

mod cmatrix;
mod experiments;

use num::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{ElementExpr, EngineError, FreeSpace, GeneratorLaw, LegId, Letter, Word};
use crate::scalar::{rational_to_f64, Rational, Scalar};

pub use cmatrix::{embed_constant, gaussian_selfadjoint, standard_normal_pair, CMatrix};
pub use experiments::{
    asymfree_ensemble, asymfree_suite, convergence_report, experiment_compression, hyperfinite_projection,
    ConvergenceReport, ConvergenceStep, DEFAULT_HYPERFINITE_LEVEL,
};

/// Absolute tolerance floor for statistical comparisons.
pub const ABS_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("matrix size must be at least 1")]
    ZeroSize,
    #[error("matrix size {n} is not a multiple of the block size {block}")]
    NotDivisible { n: usize, block: usize },
    #[error("unknown leg `{0}`")]
    UnknownLeg(String),
    #[error("duplicate leg `{0}`")]
    DuplicateLeg(String),
    #[error("word parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// An exact `N×N` constant, used both for simulation and for predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantMatrix {
    size: usize,
    /// Row-major.
    entries: Vec<Scalar>,
}

impl ConstantMatrix {
    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> Scalar) -> Self {
        let entries = (0..size * size).map(|k| f(k / size, k % size)).collect();
        ConstantMatrix { size, entries }
    }

    pub fn diag(values: &[Rational]) -> Self {
        ConstantMatrix::from_fn(values.len(), |i, j| {
            if i == j {
                Scalar::real(values[i].clone())
            } else {
                Scalar::zero()
            }
        })
    }

    /// The matrix unit `e_ij` (1-based) in `M_N`.
    pub fn unit(size: usize, i: usize, j: usize) -> Self {
        ConstantMatrix::from_fn(size, |a, b| if a + 1 == i && b + 1 == j { Scalar::one() } else { Scalar::zero() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.size + j]
    }

    /// `self ⊗ I_k`.
    pub fn lift(&self, k: usize) -> ConstantMatrix {
        ConstantMatrix::from_fn(self.size * k, |a, b| {
            if a % k == b % k {
                self.get(a / k, b / k).clone()
            } else {
                Scalar::zero()
            }
        })
    }

    pub fn adjoint(&self) -> ConstantMatrix {
        ConstantMatrix::from_fn(self.size, |i, j| self.get(j, i).conj())
    }

    /// Normalized trace `(1/N)·Tr`.
    pub fn trace(&self) -> Scalar {
        let mut t = Scalar::zero();
        for i in 0..self.size {
            t += self.get(i, i);
        }
        t.scale(&Rational::new(1.into(), (self.size as i64).into()))
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let (re, im) = self.get(i, j).to_f64_pair();
                m.re[(i, j)] = re;
                m.im[(i, j)] = im;
            }
        }
        m
    }

    /// `Σ c_ij e_ij` on a matrix-units leg of the same size.
    pub fn to_expr(&self) -> ElementExpr {
        let mut e = ElementExpr::zero();
        for i in 0..self.size {
            for j in 0..self.size {
                let c = self.get(i, j);
                if !c.is_zero() {
                    e = e.add(&ElementExpr::atom(GeneratorLaw::matrix_unit(self.size, i + 1, j + 1)).scale(c));
                }
            }
        }
        e
    }
}

/// Random legs (independent GUE, resampled per sample) and named constants.
///
/// Constants are stored lifted to a common block size so that they all live
/// in one matrix algebra `M_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleSpec {
    random: Vec<String>,
    constants: Vec<(String, ConstantMatrix)>,
    block: usize,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec::new()
    }
}

impl EnsembleSpec {
    pub fn new() -> Self {
        EnsembleSpec { random: Vec::new(), constants: Vec::new(), block: 1 }
    }

    fn check_name(&self, name: &str) -> Result<(), SimError> {
        if self.random.iter().any(|r| r == name) || self.constants.iter().any(|(c, _)| c == name) {
            return Err(SimError::DuplicateLeg(name.to_string()));
        }
        Ok(())
    }

    pub fn random(mut self, name: &str) -> Result<Self, SimError> {
        self.check_name(name)?;
        self.random.push(name.to_string());
        Ok(self)
    }

    pub fn constant(mut self, name: &str, c: ConstantMatrix) -> Result<Self, SimError> {
        self.check_name(name)?;
        if c.size() == 0 {
            return Err(SimError::ZeroSize);
        }
        let block = self.block.lcm(&c.size());
        for (_, existing) in self.constants.iter_mut() {
            *existing = existing.lift(block / existing.size());
        }
        self.block = block;
        let lifted = c.lift(block / c.size());
        self.constants.push((name.to_string(), lifted));
        Ok(self)
    }

    /// Common size of the constant algebra.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn constant_matrix(&self, name: &str) -> Option<&ConstantMatrix> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    fn check_size(&self, n: usize) -> Result<(), SimError> {
        if n == 0 {
            return Err(SimError::ZeroSize);
        }
        if !n.is_multiple_of(self.block) {
            return Err(SimError::NotDivisible { n, block: self.block });
        }
        Ok(())
    }

    /// The free model: a standard semicircular leg per random matrix and one
    /// `M_N` leg holding every constant.
    pub fn free_space(&self, max_degree: usize) -> Result<(FreeSpace, Option<LegId>), SimError> {
        let mut space = FreeSpace::new().with_max_degree(max_degree);
        for name in &self.random {
            space.add_leg_named(name, GeneratorLaw::semicircular(), vec![name.clone()])?;
        }
        let leg = if self.constants.is_empty() {
            None
        } else {
            let law = GeneratorLaw::MatrixUnits { n: self.block };
            let names = law.default_names().into_iter().map(|n| format!("#{n}")).collect();
            Some(space.add_leg_named("#constants", law, names)?)
        };
        Ok((space, leg))
    }
}

/// One factor of a simulated word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimFactor {
    pub name: String,
    pub adjoint: bool,
}

/// Parses products such as `Y1 d Y1 d`, `(e11 Y e21)*` or `(Y a)^3`.
pub fn parse_sim_word(text: &str) -> Result<Vec<SimFactor>, SimError> {
    let mut p = WordParser { src: text.as_bytes(), pos: 0 };
    let out = p.sequence()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected input"));
    }
    Ok(out)
}

struct WordParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl WordParser<'_> {
    fn error(&self, msg: &str) -> SimError {
        SimError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn sequence(&mut self) -> Result<Vec<SimFactor>, SimError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            match self.src.get(self.pos) {
                Some(b) if b.is_ascii_alphanumeric() || *b == b'_' || *b == b'(' => out.extend(self.factor()?),
                _ => return Ok(out),
            }
        }
    }

    fn factor(&mut self) -> Result<Vec<SimFactor>, SimError> {
        let mut item = if self.src[self.pos] == b'(' {
            self.pos += 1;
            let inner = self.sequence()?;
            self.skip_ws();
            if self.src.get(self.pos) != Some(&b')') {
                return Err(self.error("expected `)`"));
            }
            self.pos += 1;
            inner
        } else {
            let start = self.pos;
            while self.src.get(self.pos).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii").to_string();
            vec![SimFactor { name, adjoint: false }]
        };
        loop {
            match self.src.get(self.pos) {
                Some(b'*') => {
                    self.pos += 1;
                    item = item.into_iter().rev().map(|f| SimFactor { adjoint: !f.adjoint, ..f }).collect();
                }
                Some(b'^') => {
                    self.pos += 1;
                    let start = self.pos;
                    while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                        self.pos += 1;
                    }
                    let k: usize = std::str::from_utf8(&self.src[start..self.pos])
                        .ok()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| self.error("expected an exponent"))?;
                    item = item.iter().cloned().cycle().take(item.len() * k).collect();
                }
                _ => return Ok(item),
            }
        }
    }
}

/// A word to estimate, optionally read in the corner of a constant projection
/// (trace rescaled by `τ(p)⁻¹`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpec {
    pub text: String,
    pub factors: Vec<SimFactor>,
    pub corner: Option<String>,
}

impl WordSpec {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        Ok(WordSpec { text: text.to_string(), factors: parse_sim_word(text)?, corner: None })
    }

    pub fn in_corner(mut self, projection: &str) -> Self {
        self.corner = Some(projection.to_string());
        self
    }
}

/// Exact prediction for a word, with the oracle that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub value: Scalar,
    pub provenance: String,
}

pub fn predict(ensemble: &EnsembleSpec, word: &WordSpec) -> Result<Prediction, SimError> {
    let (space, leg) = ensemble.free_space(word.factors.len() + 2)?;
    let mut letters = Vec::with_capacity(word.factors.len());
    for f in &word.factors {
        if ensemble.random.contains(&f.name) {
            let (l, a) = space.generator(&f.name)?;
            letters.push(Letter::new(l, ElementExpr::atom(a)));
        } else if let Some(c) = ensemble.constant_matrix(&f.name) {
            let c = if f.adjoint { c.adjoint() } else { c.clone() };
            letters.push(Letter::new(leg.expect("constants exist"), c.to_expr()));
        } else {
            return Err(SimError::UnknownLeg(f.name.clone()));
        }
    }
    let word_value = Word::new(letters);
    match &word.corner {
        None => Ok(Prediction {
            value: space.trace_word(&word_value)?,
            provenance: "free product trace".into(),
        }),
        Some(p) => {
            let c = ensemble.constant_matrix(p).ok_or_else(|| SimError::UnknownLeg(p.clone()))?;
            let corner = space.compress(leg.expect("constants exist"), &c.to_expr())?;
            Ok(Prediction {
                value: corner.trace_word(&word_value)?,
                provenance: format!("free product trace in the corner of {p}"),
            })
        }
    }
}

/// A row of an empirical moment table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub word: String,
    pub n: usize,
    pub samples: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub prediction_re: f64,
    pub prediction_im: f64,
    pub z: f64,
    pub prediction: String,
    pub provenance: String,
    pub pass: bool,
}

impl MomentRow {
    pub fn deviation(&self) -> f64 {
        (self.mean_re - self.prediction_re).hypot(self.mean_im - self.prediction_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMomentTable {
    pub schema: String,
    pub experiment: String,
    pub seed: u64,
    pub rows: Vec<MomentRow>,
}

impl EmpiricalMomentTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Standard error of a complex sample mean: the complex sample standard
/// deviation over `√samples`.
fn mean_and_stderr(values: &[(f64, f64)]) -> ((f64, f64), f64) {
    let s = values.len() as f64;
    let mean = values.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    let mean = (mean.0 / s, mean.1 / s);
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v.0 - mean.0).powi(2) + (v.1 - mean.1).powi(2)).sum();
    (mean, (ss / (s - 1.0)).sqrt() / s.sqrt())
}

/// `|mean − prediction| ≤ max(3·SE, ABS_TOLERANCE)`.
pub fn within_tolerance(deviation: f64, stderr: f64) -> bool {
    deviation <= (3.0 * stderr).max(ABS_TOLERANCE)
}

enum Operand<'a> {
    Dense(CMatrix),
    Block(CMatrix),
    RefDense(&'a CMatrix),
}

impl Operand<'_> {
    fn mul(self, other: Operand<'_>) -> Operand<'static> {
        use Operand::*;
        match (self, other) {
            (Block(a), Block(b)) => Block(a.mul(&b)),
            (Block(a), Dense(b)) => Dense(CMatrix::block_mul_left(&a, &b)),
            (Block(a), RefDense(b)) => Dense(CMatrix::block_mul_left(&a, b)),
            (Dense(a), Block(b)) => Dense(CMatrix::block_mul_right(&a, &b)),
            (RefDense(a), Block(b)) => Dense(CMatrix::block_mul_right(a, &b)),
            (Dense(a), Dense(b)) => Dense(a.mul(&b)),
            (Dense(a), RefDense(b)) => Dense(a.mul(b)),
            (RefDense(a), Dense(b)) => Dense(a.mul(&b)),
            (RefDense(a), RefDense(b)) => Dense(a.mul(b)),
        }
    }

    fn normalized_trace(&self, n: usize) -> (f64, f64) {
        match self {
            // (1/n)Tr(c ⊗ I) = (1/N)Tr(c)
            Operand::Block(c) => c.normalized_trace(),
            Operand::Dense(m) => m.normalized_trace(),
            Operand::RefDense(m) => {
                debug_assert_eq!(m.size(), n);
                m.normalized_trace()
            }
        }
    }
}

/// Per-sample matrices for one ensemble.
struct Sample<'a> {
    n: usize,
    random: Vec<(&'a str, CMatrix)>,
    constants: &'a [(String, CMatrix, CMatrix)],
}

impl Sample<'_> {
    fn operand(&self, f: &SimFactor) -> Result<Operand<'_>, SimError> {
        if let Some((_, m)) = self.random.iter().find(|(name, _)| *name == f.name) {
            // GUE matrices are self-adjoint
            return Ok(Operand::RefDense(m));
        }
        if let Some((_, c, c_adj)) = self.constants.iter().find(|(name, _, _)| *name == f.name) {
            return Ok(Operand::Block(if f.adjoint { c_adj.clone() } else { c.clone() }));
        }
        Err(SimError::UnknownLeg(f.name.clone()))
    }

    fn normalized_trace(&self, factors: &[SimFactor]) -> Result<(f64, f64), SimError> {
        let Some((last, init)) = factors.split_last() else {
            return Ok((1.0, 0.0));
        };
        let mut acc: Option<Operand> = None;
        for f in init {
            let op = self.operand(f)?;
            acc = Some(match acc {
                None => op,
                Some(a) => a.mul(op),
            });
        }
        let last = self.operand(last)?;
        Ok(match (acc, last) {
            (None, op) => op.normalized_trace(self.n),
            (Some(Operand::Dense(a)), Operand::RefDense(b)) => a.normalized_trace_of_product(b),
            (Some(Operand::RefDense(a)), Operand::RefDense(b)) => a.normalized_trace_of_product(b),
            (Some(a), b) => a.mul(b).normalized_trace(self.n),
        })
    }
}

/// Estimates each word on the same `samples` draws of the random legs.
///
/// Sample `k` draws its matrices from a ChaCha8 stream keyed by `(seed, k)`;
/// samples may run in parallel and are reduced in index order, so the table
/// is reproducible.
pub fn estimate(
    ensemble: &EnsembleSpec,
    words: &[WordSpec],
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<MomentRow>, SimError> {
    ensemble.check_size(n)?;
    if samples == 0 {
        return Err(SimError::NoSamples);
    }
    let predictions: Vec<Prediction> = words.iter().map(|w| predict(ensemble, w)).collect::<Result<_, _>>()?;
    let scales: Vec<f64> = words
        .iter()
        .map(|w| match &w.corner {
            None => Ok(1.0),
            Some(p) => {
                let t = ensemble.constant_matrix(p).ok_or_else(|| SimError::UnknownLeg(p.clone()))?.trace();
                Ok(1.0 / rational_to_f64(&t.re))
            }
        })
        .collect::<Result<_, SimError>>()?;
    let block = ensemble.block;
    let constants: Vec<(String, CMatrix, CMatrix)> = ensemble
        .constants
        .iter()
        .map(|(name, c)| (name.clone(), c.to_cmatrix(), c.adjoint().to_cmatrix()))
        .collect();
    debug_assert!(constants.iter().all(|(_, c, _)| c.size() == block));

    let per_sample: Vec<Vec<(f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut random = Vec::with_capacity(ensemble.random.len());
            for name in &ensemble.random {
                random.push((name.as_str(), gaussian_selfadjoint(n, &mut rng)?));
            }
            let sample = Sample { n, random, constants: &constants };
            words
                .iter()
                .zip(&scales)
                .map(|(w, s)| sample.normalized_trace(&w.factors).map(|(a, b)| (a * s, b * s)))
                .collect()
        })
        .collect::<Result<_, SimError>>()?;

    Ok(words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let values: Vec<(f64, f64)> = per_sample.iter().map(|v| v[i]).collect();
            let ((mean_re, mean_im), stderr) = mean_and_stderr(&values);
            let pred = &predictions[i];
            let (prediction_re, prediction_im) = pred.value.to_f64_pair();
            let deviation = (mean_re - prediction_re).hypot(mean_im - prediction_im);
            let z = if stderr > 0.0 {
                deviation / stderr
            } else if deviation < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            MomentRow {
                word: w.text.clone(),
                n,
                samples,
                mean_re,
                mean_im,
                stderr,
                prediction_re,
                prediction_im,
                z,
                prediction: pred.value.to_string(),
                provenance: pred.provenance.clone(),
                pass: within_tolerance(deviation, stderr),
            }
        })
        .collect())
}

/// A single-word table row.
pub fn empirical_trace(
    ensemble: &EnsembleSpec,
    word: &WordSpec,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<MomentRow, SimError> {
    Ok(estimate(ensemble, std::slice::from_ref(word), n, samples, seed)?.remove(0))
}

/// `(1/n)Tr(Y²)`-style sample of a single GUE matrix with a seed.
pub fn sample_gaussian_selfadjoint(n: usize, seed: u64) -> Result<CMatrix, SimError> {
    gaussian_selfadjoint(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ensemble() -> EnsembleSpec {
        EnsembleSpec::new()
            .random("Y1")
            .unwrap()
            .random("Y2")
            .unwrap()
            .constant("d", ConstantMatrix::diag(&[rat(1, 1), rat(0, 1)]))
            .unwrap()
    }

    #[test]
    fn word_parsing() {
        let w = parse_sim_word("(e11 Y e21)* Y1^2").unwrap();
        let names: Vec<(&str, bool)> = w.iter().map(|f| (f.name.as_str(), f.adjoint)).collect();
        assert_eq!(names, vec![("e21", true), ("Y", true), ("e11", true), ("Y1", false), ("Y1", false)]);
        assert!(parse_sim_word("(Y").is_err());
        assert!(parse_sim_word("Y ^").is_err());
    }

    #[test]
    fn predictions_come_from_the_engine() {
        let e = ensemble();
        let p = |t: &str| predict(&e, &WordSpec::parse(t).unwrap()).unwrap().value;
        assert_eq!(p("Y1^4"), Scalar::from_i64(2));
        assert_eq!(p("Y1 Y2 Y1 Y2"), Scalar::zero());
        assert_eq!(p("d"), Scalar::ratio(1, 2));
        // τ(XdXd) = τ(X²)τ(d)² when τ(X) = 0
        assert_eq!(p("Y1 d Y1 d"), Scalar::ratio(1, 4));
        assert!(matches!(predict(&e, &WordSpec::parse("Z").unwrap()), Err(SimError::UnknownLeg(_))));
    }

    #[test]
    fn constants_are_exact() {
        let row = empirical_trace(&ensemble(), &WordSpec::parse("d").unwrap(), 8, 3, 1).unwrap();
        assert_eq!(row.mean_re, 0.5);
        assert_eq!(row.stderr, 0.0);
        assert_eq!(row.z, 0.0);
        assert!(row.pass);
    }

    #[test]
    fn reproducible_and_size_checked() {
        let words = [WordSpec::parse("Y1^2").unwrap(), WordSpec::parse("Y1 d Y2 d").unwrap()];
        let a = estimate(&ensemble(), &words, 16, 4, 9).unwrap();
        let b = estimate(&ensemble(), &words, 16, 4, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(estimate(&ensemble(), &words, 15, 4, 9), Err(SimError::NotDivisible { .. })));
        assert!(matches!(estimate(&ensemble(), &words, 16, 0, 9), Err(SimError::NoSamples)));
    }

    #[test]
    fn lifting_keeps_traces() {
        let e = ensemble().constant("h", hyperfinite_projection(2, 1)).unwrap();
        assert_eq!(e.block(), 4);
        assert_eq!(e.constant_matrix("d").unwrap().trace(), Scalar::ratio(1, 2));
        assert_eq!(e.constant_matrix("h").unwrap().trace(), Scalar::ratio(1, 4));
    }

    #[test]
    fn stderr_formula() {
        let ((m, _), se) = mean_and_stderr(&[(1.0, 0.0), (3.0, 0.0)]);
        assert_eq!(m, 2.0);
        // sample std √2, over √2
        assert!((se - 1.0).abs() < 1e-15);
    }
}
