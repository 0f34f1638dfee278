use freefactor_core::matrix_model::{
    asymfree_ensemble, convergence_report, empirical_trace, estimate, experiment_compression,
    sample_gaussian_selfadjoint, ConstantMatrix, EnsembleSpec, WordSpec, DEFAULT_HYPERFINITE_LEVEL,
};
use freefactor_core::scalar::int;

const SEED: u64 = 7;

#[test]
fn gue_second_moment() {
    let y = sample_gaussian_selfadjoint(256, SEED).unwrap();
    assert!(y.is_hermitian());
    let e = EnsembleSpec::new().random("Y").unwrap();
    let row = empirical_trace(&e, &WordSpec::parse("Y^2").unwrap(), 256, 50, SEED).unwrap();
    assert!((row.mean_re - 1.0).abs() <= 3.0 * row.stderr.max(1e-3), "{row:?}");
}

#[test]
fn single_word_examples_at_512() {
    let e = EnsembleSpec::new()
        .random("Y1")
        .unwrap()
        .random("Y2")
        .unwrap()
        .constant("d", ConstantMatrix::diag(&[int(1), int(0)]))
        .unwrap();
    let words: Vec<WordSpec> =
        ["Y1^2", "Y1 Y2 Y1 Y2", "d"].iter().map(|t| WordSpec::parse(t).unwrap()).collect();
    let rows = estimate(&e, &words, 512, 20, SEED).unwrap();
    assert!((rows[0].mean_re - 1.0).abs() <= (3.0 * rows[0].stderr).max(0.05));
    assert!(rows[1].deviation() <= (3.0 * rows[1].stderr).max(0.05));
    assert_eq!(rows[2].mean_re, 0.5);
    assert_eq!(rows[2].stderr, 0.0);
    assert!(rows.iter().all(|r| r.pass));
}

#[test]
fn compression_examples_at_512() {
    let t = experiment_compression(512, 20, SEED).unwrap();
    for row in &t.rows {
        assert!(row.pass, "{row:?}");
    }
}

#[test]
fn convergence_of_fourth_moment() {
    let e = EnsembleSpec::new().random("Y").unwrap();
    let r = convergence_report(&e, &WordSpec::parse("Y^4").unwrap(), &[64, 128, 256, 512], 20, SEED).unwrap();
    assert!(r.pass);
    let first = r.steps.first().unwrap().deviation;
    let last = r.steps.last().unwrap().deviation;
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn convergence_of_centered_alternating_word() {
    let e = asymfree_ensemble(DEFAULT_HYPERFINITE_LEVEL).unwrap();
    let r = convergence_report(&e, &WordSpec::parse("Y1 g Y1 g").unwrap(), &[64, 128, 256], 10, SEED).unwrap();
    assert!(r.pass);
    assert_eq!(r.steps[0].row.prediction, "0");
}

#[test]
fn tables_are_bit_identical_across_runs() {
    let e = asymfree_ensemble(2).unwrap();
    let w = [WordSpec::parse("Y1 h Y2 h").unwrap()];
    let a = serde_json::to_string(&estimate(&e, &w, 32, 6, 99).unwrap()).unwrap();
    let b = serde_json::to_string(&estimate(&e, &w, 32, 6, 99).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&estimate(&e, &w, 32, 6, 100).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn corner_projection_trace_scales() {
    let e = EnsembleSpec::new()
        .random("Y")
        .unwrap()
        .constant("p", ConstantMatrix::diag(&[int(1), int(0), int(0), int(0)]))
        .unwrap();
    let w = WordSpec::parse("(p Y p)^2").unwrap().in_corner("p");
    let row = empirical_trace(&e, &w, 128, 10, SEED).unwrap();
    // pYp in the corner of a trace-1/4 projection has variance 1/4
    assert_eq!(row.prediction, "1/4");
    assert!(row.pass);
}
