use serde::Serialize;

use super::{estimate, ConstantMatrix, EmpiricalMomentTable, EnsembleSpec, MomentRow, SimError, WordSpec};
use crate::engine::text::SCHEMA;
use crate::scalar::{int, rat, Rational};

/// Level `k` of the dyadic approximation `M_{2^k}` of the hyperfinite factor.
pub const DEFAULT_HYPERFINITE_LEVEL: u32 = 4;

/// The diagonal projection of rank `m` in `M_{2^k}`, of trace `m/2^k`.
pub fn hyperfinite_projection(k: u32, m: usize) -> ConstantMatrix {
    let size = 1usize << k;
    let values: Vec<Rational> = (0..size).map(|i| if i < m { int(1) } else { int(0) }).collect();
    ConstantMatrix::diag(&values)
}

fn table(experiment: &str, seed: u64, rows: Vec<MomentRow>) -> EmpiricalMomentTable {
    EmpiricalMomentTable { schema: SCHEMA.to_string(), experiment: experiment.to_string(), seed, rows }
}

fn words(texts: &[&str]) -> Result<Vec<WordSpec>, SimError> {
    texts.iter().map(|t| WordSpec::parse(t)).collect()
}

/// Two GUE matrices with block constants from `M_2` and from `M_{2^k}`.
pub fn asymfree_ensemble(k: u32) -> Result<EnsembleSpec, SimError> {
    let size = 1i64 << k;
    let rank = (size * 5 / 16).max(1);
    let h = hyperfinite_projection(k, rank as usize);
    let centered_h = ConstantMatrix::from_fn(h.size(), |i, j| {
        let mut v = h.get(i, j).clone();
        if i == j {
            v -= &crate::scalar::Scalar::real(rat(rank, size));
        }
        v
    });
    EnsembleSpec::new()
        .random("Y1")?
        .random("Y2")?
        .constant("d", ConstantMatrix::diag(&[int(1), int(0)]))?
        .constant("a", ConstantMatrix::diag(&[rat(1, 2), rat(-1, 2)]))?
        .constant("f", ConstantMatrix::unit(2, 1, 2))?
        .constant("h", h)?
        .constant("g", centered_h)
}

/// Pure powers, mixed words in two GUE matrices, and words alternating a GUE
/// matrix with block constants (`d = diag(1, 0)`, its centering `a`, the
/// nilpotent `f = e12`, a projection `h` and its centering `g` from `M_{2^k}`).
pub fn asymfree_suite(n: usize, samples: usize, seed: u64, k: u32) -> Result<EmpiricalMomentTable, SimError> {
    let ensemble = asymfree_ensemble(k)?;
    let words = words(&[
        "Y1^2",
        "Y1^4",
        "Y2^6",
        "Y1 Y2 Y1 Y2",
        "Y1^2 Y2^2",
        "d",
        "Y1 d Y1 d",
        "Y1 a Y1 a",
        "Y1 a Y2 a",
        "Y1^2 d Y2^2 d",
        "Y1 f f* Y1 f* f",
        "Y1 h Y1 h",
        "Y1 g Y2 g Y1 g",
        "Y1 g Y1 g",
    ])?;
    Ok(table("asymfree", seed, estimate(&ensemble, &words, n, samples, seed)?))
}

/// Words `e_{1i} Y e_{j1}` with 2×2 matrix units, read in the corner of
/// `e11` (trace rescaled by 2): diagonal corners are semicircular of variance
/// ½ and off-diagonal ones circular.
pub fn experiment_compression(n: usize, samples: usize, seed: u64) -> Result<EmpiricalMomentTable, SimError> {
    let mut ensemble = EnsembleSpec::new().random("Y")?.random("Z")?;
    for i in 1..=2 {
        for j in 1..=2 {
            ensemble = ensemble.constant(&format!("e{i}{j}"), ConstantMatrix::unit(2, i, j))?;
        }
    }
    let words: Vec<WordSpec> = [
        "e11 Y e11",
        "(e11 Y e11)^2",
        "(e11 Y e11)^4",
        "e11 Y e21",
        "e11 Y e21 (e11 Y e21)*",
        "(e11 Y e21)^2",
        "(e11 Y e21 (e11 Y e21)*)^2",
        "e11 Y e11 e11 Y e21 (e11 Y e21)*",
        "e11 Y e11 e11 Z e11 e11 Y e11 e11 Z e11",
    ]
    .iter()
    .map(|t| WordSpec::parse(t).map(|w| w.in_corner("e11")))
    .collect::<Result<_, _>>()?;
    Ok(table("compression", seed, estimate(&ensemble, &words, n, samples, seed)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStep {
    pub n: usize,
    pub deviation: f64,
    pub row: MomentRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub word: String,
    pub seed: u64,
    pub steps: Vec<ConvergenceStep>,
    /// Soft check: deviations never increase along the sizes.
    pub shrinking: bool,
    /// The largest size is within tolerance.
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn table(&self) -> EmpiricalMomentTable {
        table("convergence", self.seed, self.steps.iter().map(|s| s.row.clone()).collect())
    }
}

/// Estimates one word at increasing sizes.
pub fn convergence_report(
    ensemble: &EnsembleSpec,
    word: &WordSpec,
    sizes: &[usize],
    samples: usize,
    seed: u64,
) -> Result<ConvergenceReport, SimError> {
    let mut steps = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let row = estimate(ensemble, std::slice::from_ref(word), n, samples, seed)?.remove(0);
        steps.push(ConvergenceStep { n, deviation: row.deviation(), row });
    }
    let shrinking = steps.windows(2).all(|w| w[1].deviation <= w[0].deviation);
    let pass = steps.last().is_some_and(|s| s.row.pass);
    Ok(ConvergenceReport {
        schema: SCHEMA.to_string(),
        word: word.text.clone(),
        seed,
        steps,
        shrinking,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn hyperfinite_constants() {
        let h = hyperfinite_projection(DEFAULT_HYPERFINITE_LEVEL, 5);
        assert_eq!(h.size(), 16);
        assert_eq!(h.trace(), Scalar::ratio(5, 16));
    }

    #[test]
    fn suite_predictions() {
        let e = asymfree_ensemble(DEFAULT_HYPERFINITE_LEVEL).unwrap();
        assert_eq!(e.block(), 16);
        let p = |t: &str| super::super::predict(&e, &WordSpec::parse(t).unwrap()).unwrap().value;
        assert_eq!(p("Y1 a Y1 a"), Scalar::zero());
        assert_eq!(p("Y1 h Y1 h"), Scalar::ratio(25, 256));
        assert_eq!(p("Y1 f Y1 f*"), Scalar::zero());
        assert_eq!(p("Y1 f f* Y1 f* f"), Scalar::ratio(1, 4));
        assert_eq!(p("Y2^6"), Scalar::from_i64(5));
    }

    #[test]
    fn compression_small_run() {
        let t = experiment_compression(32, 3, 5).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert_eq!(t.rows[1].prediction, "1/2");
        assert_eq!(t.rows[4].prediction, "1/2");
        assert_eq!(t.rows[3].prediction, "0");
    }

    #[test]
    fn constant_words_converge_trivially() {
        let e = asymfree_ensemble(2).unwrap();
        let r = convergence_report(&e, &WordSpec::parse("d h").unwrap(), &[8, 16], 2, 1).unwrap();
        assert!(r.steps.iter().all(|s| s.deviation < 1e-15));
        assert!(r.shrinking && r.pass);
    }
}
