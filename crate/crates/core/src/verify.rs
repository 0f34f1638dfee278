//! Named self-checks behind `freefactor verify`.

use serde::Serialize;

use crate::calculus::{
    explore, fundamental_group_derivation, normalize, parse, reduce_multiset, standard_form, verify_certificate,
    verify_derivation, FactorExpr, FreeParam, DEFAULT_STATE_LIMIT,
};
use crate::engine::text::{parse_element, SCHEMA};
use crate::engine::{
    check_freeness, matrix_compression_family, matrix_corner, EngineError, FamilyMember, FreeElement, FreeSpace,
    GeneratorLaw,
};
use crate::scalar::{fmt_rational, int, rat, Rational};
use crate::two_proj::two_projection_report;

pub const SUITES: [&str; 5] = ["two-proj", "freeness", "standard-form", "calculus", "all"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub schema: String,
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Runs a suite by name; `None` for an unknown name.
pub fn run_suite(name: &str) -> Option<VerifyReport> {
    let checks = match name {
        "two-proj" => two_proj_checks(),
        "freeness" => freeness_checks(),
        "standard-form" => standard_form_checks(),
        "calculus" => calculus_checks(),
        "all" => {
            let mut all = Vec::new();
            for suite in &SUITES[..4] {
                all.extend(run_suite(suite)?.checks.into_iter().map(|mut c| {
                    c.name = format!("{suite}/{}", c.name);
                    c
                }));
            }
            all
        }
        _ => return None,
    };
    let pass = checks.iter().all(|c| c.pass);
    Some(VerifyReport { schema: SCHEMA.to_string(), suite: name.to_string(), checks, pass })
}

fn engine_failure(name: &str, e: EngineError) -> Check {
    Check::new(name, false, e.to_string())
}

pub fn two_proj_checks() -> Vec<Check> {
    let report = match two_projection_report(6, 4) {
        Ok(r) => r,
        Err(e) => return vec![engine_failure("report", e)],
    };
    let mut out: Vec<Check> = report.identities.iter().map(|c| Check::new(&c.name, c.pass, "")).collect();
    for m in &report.moments {
        out.push(Check::new(
            format!("tau((pq)^{})", m.n),
            m.pass,
            format!("engine {}, integral {}", m.engine, m.integral),
        ));
    }
    for m in &report.corner_moments {
        out.push(Check::new(
            format!("corner tau((pqp)^{})", m.n),
            m.pass,
            format!("engine {}, integral {}", m.engine, m.integral),
        ));
    }
    let h = &report.haar;
    out.push(Check::new("dihedral words orthonormal", h.orthonormal_basis, format!("length <= {}", h.truncation)));
    out.push(Check::new("x* has no component on 1 or s", h.excludes_one_and_s, ""));
    out.push(Check::new("x*u is unitary on the corner", h.unitary_on_corner, ""));
    for p in &h.powers {
        out.push(Check::new(
            format!("tau((x*u)^{}) = 0", p.k),
            p.pass,
            format!("{} words, {} nonzero", p.words_checked, p.nonzero),
        ));
    }
    out
}

fn family(space: &FreeSpace, items: &[&str]) -> Result<Vec<FamilyMember>, EngineError> {
    items.iter().map(|t| Ok(FamilyMember::new(*t, parse_element(space, t)?))).collect()
}

fn freeness_case(
    name: &str,
    expect_free: bool,
    build: impl FnOnce() -> Result<(FreeSpace, Vec<Vec<FamilyMember>>, usize), EngineError>,
) -> Check {
    match build().and_then(|(space, families, degree)| check_freeness(&space, &families, degree)) {
        Ok(r) => {
            let detail = match r.violations.first() {
                Some(v) => format!("{} words, first violation {} -> {}", r.checked, v.word, v.trace),
                None => format!("{} words", r.checked),
            };
            Check::new(name, r.is_free() == expect_free, detail)
        }
        Err(e) => engine_failure(name, e),
    }
}

pub fn freeness_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(freeness_case("free semicirculars", true, || {
        let mut s = FreeSpace::new();
        s.add_leg_named("A", GeneratorLaw::semicircular(), vec!["X1".into()])?;
        s.add_leg_named("B", GeneratorLaw::semicircular(), vec!["X2".into()])?;
        let f = vec![family(&s, &["X1"])?, family(&s, &["X2"])?];
        Ok((s, f, 6))
    }));
    out.push(freeness_case("free projections of trace 1/2 and 1/3", true, || {
        let mut s = FreeSpace::new();
        s.add_leg_named("P", GeneratorLaw::projection(rat(1, 2)), vec!["p".into()])?;
        s.add_leg_named("Q", GeneratorLaw::projection(rat(1, 3)), vec!["q".into()])?;
        let f = vec![family(&s, &["p"])?, family(&s, &["q"])?];
        Ok((s, f, 6))
    }));
    out.push(freeness_case("Haar unitary and semicircular", true, || {
        let mut s = FreeSpace::new();
        s.add_leg("U", GeneratorLaw::HaarUnitary)?;
        s.add_leg_named("S", GeneratorLaw::semicircular(), vec!["X".into()])?;
        let f = vec![family(&s, &["u"])?, family(&s, &["X"])?];
        Ok((s, f, 4))
    }));
    out.push(freeness_case("three free legs", true, || {
        let mut s = FreeSpace::new();
        s.add_leg_named("P", GeneratorLaw::projection(rat(1, 4)), vec!["p".into()])?;
        s.add_leg_named("S", GeneratorLaw::semicircular(), vec!["X".into()])?;
        s.add_leg("E", GeneratorLaw::MatrixUnits { n: 2 })?;
        let f = vec![family(&s, &["p"])?, family(&s, &["X"])?, family(&s, &["e12"])?];
        Ok((s, f, 4))
    }));
    out.push(freeness_case("matrix-unit compressions in the corner", true, || {
        let mut s = FreeSpace::new();
        let units = s.add_leg("E", GeneratorLaw::MatrixUnits { n: 2 })?;
        let x1 = s.add_leg_named("S1", GeneratorLaw::semicircular(), vec!["X1".into()])?;
        let x2 = s.add_leg_named("S2", GeneratorLaw::semicircular(), vec!["X2".into()])?;
        let corner = matrix_corner(&s, units)?;
        let word = |g, i, j| -> Result<FreeElement, EngineError> {
            Ok(FreeElement::from_word(matrix_compression_family(&s, units, g, i, j)?))
        };
        let f = vec![
            vec![FamilyMember::new("a11", word(x1, 1, 1)?), FamilyMember::new("b11", word(x2, 1, 1)?)],
            vec![FamilyMember::new("a12", word(x1, 1, 2)?), FamilyMember::new("b12", word(x2, 1, 2)?)],
        ];
        Ok((corner, f, 4))
    }));
    out.push(freeness_case("control: p and pqp are not free", false, || {
        let mut s = FreeSpace::new();
        s.add_leg_named("P", GeneratorLaw::projection(rat(1, 2)), vec!["p".into()])?;
        s.add_leg_named("Q", GeneratorLaw::projection(rat(1, 2)), vec!["q".into()])?;
        let f = vec![family(&s, &["p"])?, family(&s, &["p q p"])?];
        Ok((s, f, 4))
    }));
    out.push(freeness_case("control: X and X^2 are not free", false, || {
        let mut s = FreeSpace::new();
        s.add_leg_named("S", GeneratorLaw::semicircular(), vec!["X".into()])?;
        let f = vec![family(&s, &["X"])?, family(&s, &["X^2"])?];
        Ok((s, f, 4))
    }));
    out
}

/// Multisets of dyadic traces for the cut-and-paste reducer.
pub fn dyadic_corpus() -> Vec<Vec<Rational>> {
    let q = |n: i64, d: i64| rat(n, d);
    vec![
        vec![q(1, 1)],
        vec![q(1, 2)],
        vec![q(1, 2), q(1, 2), q(1, 2)],
        vec![q(1, 2), q(1, 2), q(1, 2), q(1, 2)],
        vec![q(3, 4)],
        vec![q(3, 4), q(3, 4)],
        vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
        vec![q(5, 8)],
        vec![q(7, 8)],
        vec![q(15, 16)],
        vec![q(1, 1), q(1, 2)],
        vec![q(1, 1), q(1, 1), q(3, 4)],
        vec![q(3, 8), q(5, 16)],
        vec![q(1, 8); 16],
        vec![q(1, 16); 9],
        vec![q(7, 16), q(9, 16)],
        vec![q(11, 32)],
        vec![q(31, 32), q(1, 32)],
        vec![q(3, 4), q(1, 2), q(1, 4)],
        vec![q(13, 64), q(3, 64), q(63, 64)],
        vec![q(1, 2); 7],
        vec![q(255, 256)],
        vec![q(5, 16), q(5, 16), q(5, 16)],
        vec![q(1, 1), q(1, 4), q(1, 16), q(1, 64)],
    ]
}

pub fn standard_form_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for (r, expected) in [(rat(2, 1), "c0=1"), (rat(7, 4), "c1=3"), (rat(5, 4), "c1=1"), (rat(25, 16), "c1=2, c2=1")] {
        let form = standard_form(&FreeParam::Finite(r.clone())).expect("finite");
        out.push(Check::new(
            format!("standard_form({})", fmt_rational(&r)),
            form.to_string() == expected,
            form.to_string(),
        ));
    }
    for r in [rat(4, 3), rat(8, 5), rat(13, 7), rat(31, 10)] {
        let form = standard_form(&FreeParam::Finite(r.clone())).expect("finite");
        let ok = form.r() == r && form.digits_in_range() && form.tail_condition();
        out.push(Check::new(format!("periodic standard_form({})", fmt_rational(&r)), ok, form.to_string()));
    }
    for traces in dyadic_corpus() {
        let label: Vec<String> = traces.iter().map(fmt_rational).collect();
        let name = format!("reduce {{{}}}", label.join(", "));
        match reduce_multiset(&traces) {
            Ok(red) => {
                let ok = red.all_moves_preserve()
                    && red.form.digits_in_range()
                    && red.form.tail_condition()
                    && red.form.r() == red.r
                    && red.matches_standard_form;
                out.push(Check::new(
                    name,
                    ok,
                    format!("r = {}, {} moves, {}", fmt_rational(&red.r), red.moves.len(), red.form),
                ));
            }
            Err(e) => out.push(Check::new(name, false, e.to_string())),
        }
    }
    out
}

/// Free products, compressions and amplifications of `LF(r)` with their
/// expected parameters.
pub fn calculus_corpus() -> Vec<(String, FreeParam)> {
    let one = int(1);
    let params = [rat(2, 1), rat(3, 1), rat(3, 2), rat(5, 4), rat(7, 4), rat(11, 3), rat(10, 1)];
    let mut out = Vec::new();
    for (i, a) in params.iter().enumerate() {
        for b in &params[i..] {
            out.push((format!("LF({}) * LF({})", fmt_rational(a), fmt_rational(b)), FreeParam::Finite(a + b)));
        }
    }
    for r in &params[..4] {
        for g in [rat(1, 4), rat(1, 2), rat(4, 9), rat(3, 1)] {
            let expected = &one + (r - &one) / &g;
            out.push((
                format!("compress(LF({}), gsq={})", fmt_rational(r), fmt_rational(&g)),
                FreeParam::Finite(expected),
            ));
        }
    }
    for r in &params[..2] {
        for n in [2i64, 3] {
            let expected = &one + (r - &one) / int(n * n);
            out.push((format!("tensor(LF({}), M{n})", fmt_rational(r)), FreeParam::Finite(expected)));
        }
    }
    out.push(("LF(2) * LF(inf)".into(), FreeParam::Infinite));
    out.push(("compress(LF(inf), gsq=1/7)".into(), FreeParam::Infinite));
    out
}

/// The two rewrite paths for `(R⊗M2) * (R⊗M2)`.
pub fn matrix_pair_paths() -> Vec<(String, FactorExpr)> {
    ["tensor(R, M2) * tensor(R, M2)", "tensor(R * R * LF(3), M2)"]
        .iter()
        .map(|t| (t.to_string(), normalize(&parse(t).expect("valid")).result))
        .collect()
}

pub fn calculus_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for (text, expected) in calculus_corpus() {
        let check = match parse(&text) {
            Ok(e) => {
                let n = normalize(&e);
                let replay = verify_derivation(&n.derivation).is_ok();
                Check::new(&text, n.result == FactorExpr::Lf(expected.clone()) && replay, n.result.to_string())
            }
            Err(e) => Check::new(&text, false, e.to_string()),
        };
        out.push(check);
    }
    let paths = matrix_pair_paths();
    let lf2 = FactorExpr::Lf(FreeParam::Finite(int(2)));
    for (text, result) in &paths {
        out.push(Check::new(format!("path {text}"), *result == lf2, result.to_string()));
    }
    for text in [
        "tensor(R, M2) * tensor(R, M2)",
        "R * R",
        "LZ * LZ",
        "R * tensor(R, LZ2)",
        "(LF(2) * R) * (LZ * LF(3/2))",
        "compress(tensor(R * LF(2), M2), gsq=1/4)",
        "LZ2 * LZ2",
        "M2 * M2 * R",
    ] {
        let e = parse(text).expect("valid");
        let ex = explore(&e, DEFAULT_STATE_LIMIT);
        let forms: Vec<String> = ex.normal_forms.iter().map(|f| f.to_string()).collect();
        out.push(Check::new(
            format!("confluence {text}"),
            ex.confluent(),
            format!("{} states, normal forms: {}", ex.states, forms.join(" | ")),
        ));
    }
    let r = FreeParam::Finite(int(2));
    let rp = FreeParam::Finite(int(3));
    for g in [rat(1, 4), int(4), rat(9, 4), rat(1, 9)] {
        let name = format!("derivation 2 ~ 3 gives gamma^2 = {}", fmt_rational(&g));
        match fundamental_group_derivation(&r, &rp, &g) {
            Ok(c) => {
                let accepted = verify_certificate(&c).is_ok();
                let tamper_rejected = (0..c.steps.len()).all(|k| {
                    let mut bad = c.clone();
                    bad.steps[k].fact.right += rat(1, 3);
                    verify_certificate(&bad).is_err()
                });
                out.push(Check::new(
                    name,
                    accepted && tamper_rejected,
                    format!("{} steps, every single-step tamper rejected: {tamper_rejected}", c.steps.len()),
                ));
            }
            Err(e) => out.push(Check::new(name, false, e.to_string())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass() {
        for suite in ["two-proj", "freeness", "standard-form", "calculus"] {
            let r = run_suite(suite).unwrap();
            let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).collect();
            assert!(failed.is_empty(), "{suite}: {failed:?}");
        }
        assert!(run_suite("nope").is_none());
    }

    #[test]
    fn corpus_sizes() {
        assert!(dyadic_corpus().len() >= 20);
        assert_eq!(calculus_corpus().len(), 50);
    }
}
