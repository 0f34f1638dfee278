use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use freefactor_core::calculus::{self, CalcError};
use freefactor_core::engine::text::{parse_element, SpaceDoc};
use freefactor_core::matrix_model::{
    asymfree_suite, convergence_report, experiment_compression, EmpiricalMomentTable, EnsembleSpec, WordSpec,
    DEFAULT_HYPERFINITE_LEVEL,
};
use freefactor_core::verify::{run_suite, SUITES};

const USAGE_ERROR: u8 = 1;
const IRREDUCIBLE: u8 = 2;
const OUT_OF_TOLERANCE: u8 = 3;

/// Exact free probability, random matrix checks and factor arithmetic.
///
/// Exit codes: 0 success, 1 usage or input error (and a failing `verify`
/// check), 2 irreducible `calc` result, 3 a simulated moment outside
/// tolerance.
#[derive(Debug, Parser)]
#[command(name = "freefactor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize a factor expression such as `compress(LF(2), gsq=1/4) * R`.
    ///
    /// Atoms: C, LZ, LZ2, R, M<n>, LF(r) with r > 1 or `inf`. Forms:
    /// `a * b` (free product), `tensor(e, M<n>)`, `tensor(e, LZ2)`,
    /// `compress(e, gsq=g)`. Prints the normal form; exits 0 when it is a
    /// single LF, R, M or C and 2 otherwise.
    Calc {
        expr: String,
        /// Also print the rewrite steps as JSON.
        #[arg(long)]
        certificate: bool,
    },
    /// Exact trace of an element in a free product described by a JSON file.
    ///
    /// The file holds `{"legs": [{"id", "law": {"kind": ...}, "names"}],
    /// "max_degree", "corner"}` with law kinds semicircular (variance),
    /// projection (trace), haar_unitary, circular, matrix_units (n) and
    /// finite_dim. Elements use the generator names, juxtaposition for
    /// products, `x*` for adjoints and `^k` for powers.
    Moments {
        space: PathBuf,
        word: String,
        /// Print the traces of powers 1..=k instead.
        #[arg(long, value_name = "K")]
        series: Option<usize>,
    },
    /// Seeded GUE experiments; writes a moment table and exits 3 if any row
    /// misses its prediction by more than max(3 SE, 0.05).
    ///
    /// Table columns: word, n, samples, mean_re, mean_im, stderr,
    /// prediction_re, prediction_im, z, prediction, provenance, pass.
    Simulate {
        experiment: Experiment,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Matrix sizes for `convergence`, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        sizes: Vec<usize>,
        /// Word estimated by `convergence`.
        #[arg(long, default_value = "Y^4")]
        word: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a named self-check suite and print a JSON report.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Asymfree,
    Compression,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure { code: USAGE_ERROR, msg: msg.into() }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn calc(expr: &str, certificate: bool) -> Result<u8, Failure> {
    let parsed = calculus::parse(expr).map_err(|e| match e {
        CalcError::Parse { pos, .. } => {
            let col = expr.get(..pos).map_or(pos, |head| head.chars().count());
            Failure::input(format!("{e}\n  {expr}\n  {}^", " ".repeat(col)))
        }
        other => Failure::input(other.to_string()),
    })?;
    let n = calculus::normalize(&parsed);
    println!("{}", n.result);
    if certificate {
        println!("{}", to_json(&n.derivation));
    }
    Ok(if n.canonical { 0 } else { IRREDUCIBLE })
}

fn moments(path: &PathBuf, word: &str, series: Option<usize>) -> Result<u8, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let doc: SpaceDoc =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let space = doc.build().map_err(|e| Failure::input(e.to_string()))?;
    let element = parse_element(&space, word).map_err(|e| Failure::input(e.to_string()))?;
    match series {
        None => println!("{}", space.trace(&element).map_err(|e| Failure::input(e.to_string()))?),
        Some(k) => {
            for j in 1..=k {
                let t = space.trace(&element.pow(j)).map_err(|e| Failure::input(e.to_string()))?;
                println!("{j} {t}");
            }
        }
    }
    Ok(0)
}

fn render(table: &EmpiricalMomentTable, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(to_json(table) + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &table.rows {
                w.serialize(row).map_err(|e| Failure::input(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::input(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    experiment: Experiment,
    n: usize,
    samples: usize,
    seed: u64,
    sizes: &[usize],
    word: &str,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<u8, Failure> {
    let sim = |e: freefactor_core::matrix_model::SimError| Failure::input(e.to_string());
    let table = match experiment {
        Experiment::Asymfree => asymfree_suite(n, samples, seed, DEFAULT_HYPERFINITE_LEVEL).map_err(sim)?,
        Experiment::Compression => experiment_compression(n, samples, seed).map_err(sim)?,
        Experiment::Convergence => {
            let ensemble = EnsembleSpec::new().random("Y").map_err(sim)?;
            let word = WordSpec::parse(word).map_err(sim)?;
            let report = convergence_report(&ensemble, &word, sizes, samples, seed).map_err(sim)?;
            for step in &report.steps {
                eprintln!("n={} deviation={:.6}", step.n, step.deviation);
            }
            if !report.shrinking {
                eprintln!("note: deviations are not monotone in n");
            }
            report.table()
        }
    };
    let text = render(&table, format)?;
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::input(e.to_string()))?,
    }
    Ok(if table.all_pass() { 0 } else { OUT_OF_TOLERANCE })
}

fn verify(suite: &str) -> Result<u8, Failure> {
    let report = run_suite(suite).ok_or_else(|| Failure::input(format!("unknown suite `{suite}`")))?;
    println!("{}", to_json(&report));
    Ok(if report.pass { 0 } else { USAGE_ERROR })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_ERROR } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Calc { expr, certificate } => calc(expr, *certificate),
        Command::Moments { space, word, series } => moments(space, word, *series),
        Command::Simulate { experiment, n, samples, seed, sizes, word, format, output } => {
            simulate(*experiment, *n, *samples, *seed, sizes, word, *format, output.as_ref())
        }
        Command::Verify { suite } => verify(suite),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
