//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line is printed; the process fails if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use freefactor_core::calculus::{
    compress_rule, fundamental_group_derivation, normalize, parse, reduce_multiset, standard_form,
    verify_certificate, verify_derivation, FactorExpr, FreeParam,
};
use freefactor_core::engine::text::parse_word;
use freefactor_core::engine::{ElementExpr, FreeSpace, GeneratorLaw};
use freefactor_core::matrix_model::{asymfree_suite, experiment_compression, DEFAULT_HYPERFINITE_LEVEL};
use freefactor_core::nc::{catalan_rational, semicircle_moment};
use freefactor_core::scalar::{int, rat, Rational, Scalar};
use freefactor_core::two_proj::{build_generators, haar_check_xu, identity_checks, moment_match};
use freefactor_core::verify::{calculus_corpus, dyadic_corpus, matrix_pair_paths};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;
const N: usize = 512;
const SAMPLES: usize = 20;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn trace(space: &FreeSpace, word: &str) -> Result<Scalar, String> {
    let w = parse_word(space, word).map_err(|e| e.to_string())?;
    space.trace_word(&w).map_err(|e| e.to_string())
}

fn semicircle() -> Outcome {
    let mut s = FreeSpace::new().with_max_degree(16);
    s.add_leg_named("S", GeneratorLaw::semicircular(), vec!["X".into()]).map_err(|e| e.to_string())?;
    for j in 1..=16u32 {
        let expected = if j % 2 == 0 { catalan_rational(j / 2) } else { int(0) };
        let got = trace(&s, &format!("X^{j}"))?;
        ensure(got == Scalar::real(expected.clone()), format!("tau(X^{j}) = {got}, expected {expected}"))?;
    }
    Ok("tau(X^2k) = Catalan(k) for k <= 8, odd powers 0".into())
}

fn free_projections() -> Outcome {
    let rows = moment_match(6).map_err(|e| e.to_string())?;
    for r in &rows {
        ensure(r.pass, format!("n={}: engine {} vs integral {}", r.n, r.engine, r.integral))?;
    }
    ensure(rows[0].engine == Scalar::ratio(1, 4), format!("n=1 gives {}", rows[0].engine))?;
    ensure(rows[1].engine == Scalar::ratio(3, 16), format!("n=2 gives {}", rows[1].engine))?;
    let shown: Vec<String> = rows.iter().map(|r| r.engine.to_string()).collect();
    Ok(format!("tau((pq)^n), n=1..6: {}", shown.join(", ")))
}

fn table_outcome(table: &freefactor_core::matrix_model::EmpiricalMomentTable) -> Outcome {
    let worst = table.rows.iter().map(|r| r.deviation()).fold(0.0, f64::max);
    for r in &table.rows {
        ensure(
            r.pass,
            format!("{}: mean {:.4} vs {} (se {:.4})", r.word, r.mean_re, r.prediction, r.stderr),
        )?;
    }
    Ok(format!("{} words within max(3 SE, 0.05), worst deviation {worst:.4}", table.rows.len()))
}

fn asymfree() -> Outcome {
    let table = asymfree_suite(N, SAMPLES, SEED, DEFAULT_HYPERFINITE_LEVEL).map_err(|e| e.to_string())?;
    table_outcome(&table)
}

fn compression() -> Outcome {
    let table = experiment_compression(N, SAMPLES, SEED).map_err(|e| e.to_string())?;
    for word in ["(e11 Y e11)^2", "e11 Y e21 (e11 Y e21)*"] {
        let row = table.rows.iter().find(|r| r.word == word).ok_or(format!("missing row {word}"))?;
        ensure(row.prediction == "1/2", format!("{word} predicts {}", row.prediction))?;
    }
    table_outcome(&table)
}

fn compressed_semicircle() -> Outcome {
    for alpha in [rat(1, 4), rat(1, 2), rat(3, 4)] {
        let mut s = FreeSpace::new().with_max_degree(17);
        let p = s
            .add_leg_named("P", GeneratorLaw::projection(alpha.clone()), vec!["p".into()])
            .map_err(|e| e.to_string())?;
        s.add_leg_named("S", GeneratorLaw::semicircular(), vec!["X".into()]).map_err(|e| e.to_string())?;
        let corner = s.compress(p, &ElementExpr::atom(0)).map_err(|e| e.to_string())?;
        for k in 1..=8i64 {
            let expected = semicircle_moment(k, &alpha).map_err(|e| e.to_string())?;
            let got = trace(&corner, &format!("(p X p)^{k}"))?;
            ensure(got == Scalar::real(expected.clone()), format!("alpha {alpha}, k {k}: {got} vs {expected}"))?;
        }
    }
    Ok("pXp in the corner has semicircle moments, alpha in {1/4, 1/2, 3/4}, k <= 8".into())
}

fn angle_identities() -> Outcome {
    let checks = identity_checks(&build_generators());
    ensure(!checks.is_empty(), "no identities")?;
    for c in &checks {
        ensure(c.pass, format!("{} fails", c.name))?;
    }
    Ok(format!("{} identities hold exactly", checks.len()))
}

fn haar() -> Outcome {
    let report = haar_check_xu(4, 4).map_err(|e| e.to_string())?;
    ensure(report.excludes_one_and_s, "x* has a component on 1 or s")?;
    ensure(report.unitary_on_corner, "x*u is not unitary on the corner")?;
    for p in &report.powers {
        ensure(p.pass, format!("k={}: {} of {} words nonzero", p.k, p.nonzero, p.words_checked))?;
    }
    ensure(report.pass && report.powers.len() == 4, "incomplete report")?;
    let words: usize = report.powers.iter().map(|p| p.words_checked).sum();
    Ok(format!("tau((x*u)^k) = 0 for k = 1..4 ({words} expansion terms)"))
}

fn cli_binary() -> Option<PathBuf> {
    // target/<profile>/deps/acceptance-* -> target/<profile>/freefactor
    let exe = std::env::current_exe().ok()?;
    let bin = exe.parent()?.parent()?.join(format!("freefactor{}", std::env::consts::EXE_SUFFIX));
    bin.exists().then_some(bin)
}

fn calculus() -> Outcome {
    let corpus = calculus_corpus();
    ensure(corpus.len() == 50, format!("corpus has {} cases", corpus.len()))?;
    for (text, expected) in &corpus {
        let e = parse(text).map_err(|e| format!("{text}: {e}"))?;
        let n = normalize(&e);
        verify_derivation(&n.derivation).map_err(|e| format!("{text}: {e}"))?;
        ensure(n.result == FactorExpr::Lf(expected.clone()), format!("{text} gave {}", n.result))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut q = |lo: i64, hi: i64| rat(rng.random_range(lo..hi), rng.random_range(1..hi));
    for _ in 0..100 {
        let r = FreeParam::new(int(1) + q(1, 60)).map_err(|e| e.to_string())?;
        let (g1, g2) = (q(1, 40), q(1, 40));
        let once = compress_rule(&r, &g1).map_err(|e| e.to_string())?;
        let back = compress_rule(&once, &g1.recip()).map_err(|e| e.to_string())?;
        ensure(back == r, format!("round trip of {r} by {g1}"))?;
        let twice = compress_rule(&once, &g2).map_err(|e| e.to_string())?;
        let direct = compress_rule(&r, &(&g1 * &g2)).map_err(|e| e.to_string())?;
        ensure(twice == direct, format!("composition of {r} by {g1}, {g2}"))?;
        let nested = FactorExpr::compress(FactorExpr::compress(FactorExpr::Lf(r.clone()), g1.clone()), g2.clone());
        ensure(normalize(&nested).result == FactorExpr::Lf(direct), format!("normalize nested {nested}"))?;
    }

    let bin = cli_binary().ok_or("freefactor binary not built; run the workspace tests")?;
    for (args, code) in [
        (vec!["calc", "LF(2)*LF(3)"], 0),
        (vec!["calc", "compress(LF(2), gsq=1/4)"], 0),
        (vec!["calc", "R*R"], 0),
        (vec!["calc", "M3 * M5"], 2),
        (vec!["calc", "LF(1/2)"], 1),
        (vec!["calc", "compress(LF(2), gsq=-1)"], 1),
    ] {
        let out = Command::new(&bin).args(&args).output().map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(code), format!("{args:?} exited {:?}", out.status.code()))?;
    }
    Ok("50-case corpus, 100 random round trips and compositions, exit codes 0/1/2".into())
}

fn confluence() -> Outcome {
    let lf2 = FactorExpr::lf(int(2)).map_err(|e| e.to_string())?;
    for (text, result) in matrix_pair_paths() {
        ensure(result == lf2, format!("{text} gave {result}"))?;
    }
    let sf = standard_form(&FreeParam::new(rat(7, 4)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(sf.to_string() == "c1=3", format!("standard_form(7/4) = {sf}"))?;
    let instance = normalize(&parse("R * tensor(R, LZ2)").map_err(|e| e.to_string())?).result;
    // (A⊗M2) * (B⊗LZ2) with A = B = R is (R*R*R*LF(2))⊗M2 = LF(5)⊗M2 = LF(2);
    // LF(7/4) is R * M2
    ensure(
        instance == FactorExpr::lf(rat(7, 4)).map_err(|e| e.to_string())?,
        format!(
            "both paths give LF(2) and standard_form(7/4) = c1=3, but R * tensor(R, LZ2) normalizes to {instance}, \
             not LF(7/4)"
        ),
    )?;
    Ok("both paths give LF(2); R * tensor(R, LZ2) gives LF(7/4)".into())
}

fn reducer() -> Outcome {
    let corpus = dyadic_corpus();
    ensure(corpus.len() >= 20, "corpus too small")?;
    let mut moves = 0;
    for traces in &corpus {
        let red = reduce_multiset(traces).map_err(|e| e.to_string())?;
        let expected = int(1) + traces.iter().map(|t| t * t).sum::<Rational>();
        ensure(red.r == expected, format!("{traces:?}: r {} vs {expected}", red.r))?;
        ensure(red.all_moves_preserve(), format!("{traces:?}: a move changes the sum"))?;
        for m in &red.moves {
            ensure(m.sum_before == m.sum_after, format!("{traces:?}: {m:?}"))?;
        }
        ensure(red.form.digits_in_range() && red.form.tail_condition(), format!("{traces:?}: {}", red.form))?;
        let sf = standard_form(&FreeParam::new(expected).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(red.form == sf && red.matches_standard_form, format!("{traces:?}: {} vs {sf}", red.form))?;
        moves += red.moves.len();
    }
    Ok(format!("{} multisets, {moves} moves, all sums preserved", corpus.len()))
}

fn dichotomy() -> Outcome {
    let (r, rp) = (FreeParam::new(int(2)).unwrap(), FreeParam::new(int(3)).unwrap());
    let mut tampered = 0;
    for g in [rat(1, 4), int(4), rat(9, 4), rat(1, 9)] {
        let cert = fundamental_group_derivation(&r, &rp, &g).map_err(|e| format!("gsq {g}: {e}"))?;
        verify_certificate(&cert).map_err(|e| format!("gsq {g}: {e}"))?;
        ensure(cert.target.right == int(1) + g.recip(), format!("gsq {g}: target {:?}", cert.target))?;
        for i in 0..cert.steps.len() {
            for side in 0..2 {
                let mut bad = cert.clone();
                let fact = &mut bad.steps[i].fact;
                if side == 0 {
                    fact.left += rat(1, 7);
                } else {
                    fact.right += rat(1, 7);
                }
                ensure(verify_certificate(&bad).is_err(), format!("gsq {g}: tampering step {i} accepted"))?;
                tampered += 1;
            }
        }
    }
    Ok(format!("4 certificates verified, {tampered} single-step tamperings rejected"))
}

fn main() {
    type Criterion = (&'static str, &'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("1", "symbolic semicircle", 1, semicircle),
        ("2", "free projections", 1, free_projections),
        ("3", "asymptotic freeness statistics", 120, asymfree),
        ("4", "compression statistics", 120, compression),
        ("5", "compressed semicircle", 5, compressed_semicircle),
        ("6", "angle model identities", 1, angle_identities),
        ("7", "Haar unitary x*u", 10, haar),
        ("8", "calculus corpus and exit codes", 1, calculus),
        ("9", "matrix pair confluence and symmetry instance", 1, confluence),
        ("10", "cut and paste reducer", 1, reducer),
        ("11", "fundamental group certificates", 5, dichotomy),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(limit) => Err(format!("{msg}; over the {limit}s limit")),
            other => other,
        };
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} [{id:>2}] {name} ({:.2}s, limit {limit}s): {msg}", elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
