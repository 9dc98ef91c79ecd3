//! Command-line front end: `analyze`, `generate` and `selftest`.
//!
//! Exit codes: 0 on success (a "no" verdict is still success), 1 when a
//! selftest suite fails, 2 when the input sequence cannot be read or parsed,
//! 3 for invalid flags or parameters.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::convergence::{default_eps_grid, Tolerances};
use crate::error::{Error, Result};
use crate::geocore::GeoNum;
use crate::orlicz::OrliczFn;
use crate::report::{analyze, to_json, Analysis, AnalyzeConfig};
use crate::selftest::{run_all, DEFAULT_CASES, DEFAULT_SEED};
use crate::seqmodel::{
    generate, ingest, read_lambda, read_p, serialize_log, Family, GeoSeq, LambdaKind, LambdaSeq, PSeq,
    SeqFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PARAMETER: i32 = 3;

/// Environment variable that overrides `selftest --seed`.
pub const SEED_ENV: &str = "GEOMSEQ_SEED";

#[derive(Debug, Parser)]
#[command(name = "geomseq", version, about = "Geometric difference sequence spaces on finite truncations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run membership, norm, density and dual analyses and emit a JSON report.
    Analyze(AnalyzeArgs),
    /// Write the first N terms of a sequence family as a log-format file.
    Generate(GenerateArgs),
    /// Run the seeded property suites of every module.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Raw,
    Log,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Sequence file (one value per line, optional `#format:` header).
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    input: Option<PathBuf>,
    /// Family spec, e.g. `log-polynomial:m=2` (needs --n).
    #[arg(long, requires = "n")]
    generate: Option<String>,
    /// Length to generate, or to truncate the input to.
    #[arg(long)]
    n: Option<usize>,
    /// Difference order.
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// `n`, `const1`, `half`, `sqrt`, or `file:PATH`.
    #[arg(long, default_value = "n")]
    lambda: String,
    /// Format of an input file without a header.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Comma list of analyses, or `all`.
    #[arg(long, default_value = "all")]
    spaces: String,
    /// Comma list of log ε values for the density tests.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Fraction of the truncation treated as the tail.
    #[arg(long, default_value_t = 0.2)]
    tail: f64,
    /// Orlicz function as inline JSON or a path to a JSON file.
    #[arg(long, default_value = r#"{"family":"power","q":1}"#)]
    orlicz: String,
    /// Constant exponent, or a path to a file of exponents.
    #[arg(long, default_value = "1")]
    p: String,
    /// Bisection width on log ρ for the paranorm.
    #[arg(long, default_value_t = 1e-9)]
    tol_rho: f64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Family spec, e.g. `sparse-spike:set=squares,height=1`.
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Overridden by the GEOMSEQ_SEED environment variable.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Cases per suite.
    #[arg(long, default_value_t = DEFAULT_CASES)]
    cases: usize,
}

/// An error tagged with the exit code it maps to.
struct Failure {
    code: i32,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { code: EXIT_PARAMETER, error }
    }
}

fn input_failure(error: Error) -> Failure {
    Failure { code: EXIT_INPUT, error }
}

/// Parses `args` (program name first) and runs the command. Diagnostics go
/// to `err`; reports and sequences without `--out` go to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_PARAMETER
                }
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Generate(g) => cmd_generate(&g, out),
        Command::Selftest(s) => cmd_selftest(&s, std::env::var(SEED_ENV).ok(), out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.error);
            f.code
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::from(Error::from(e))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::from(Error::from(e))),
    }
}

fn load_sequence(a: &AnalyzeArgs) -> std::result::Result<GeoSeq, Failure> {
    let x = match (&a.input, &a.generate) {
        (Some(path), _) => {
            let fallback = a.format.map(|f| match f {
                FormatArg::Raw => SeqFormat::Raw,
                FormatArg::Log => SeqFormat::Log,
            });
            ingest(path, fallback).map_err(input_failure)?
        }
        (None, Some(spec)) => {
            let family: Family = spec.parse()?;
            generate(&family, a.n.expect("clap enforces --n with --generate"))?
        }
        (None, None) => unreachable!("clap requires --input or --generate"),
    };
    match a.n {
        Some(n) if a.input.is_some() && n < x.len() => Ok(x.truncate(n)?),
        _ => Ok(x),
    }
}

fn load_lambda(spec: &str, len: usize) -> Result<LambdaSeq> {
    if let Some(path) = spec.strip_prefix("file:") {
        let lam = read_lambda(Path::new(path))?;
        if lam.len() < len {
            return Err(Error::InvalidLambda {
                index: lam.len() + 1,
                reason: format!("file has {} terms, the sequence {len}", lam.len()),
            });
        }
        return Ok(lam);
    }
    LambdaKind::parse(spec).map(|k| k.build(len)).ok_or_else(|| {
        Error::InvalidParameter(format!("unknown lambda `{spec}` (n, const1, half, sqrt, file:PATH)"))
    })
}

fn load_p(spec: &str) -> Result<PSeq> {
    match spec.trim().parse::<f64>() {
        Ok(p) => PSeq::constant(p),
        Err(_) => read_p(Path::new(spec)),
    }
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let x = load_sequence(a)?;
    let eps = match &a.eps {
        Some(v) => v.iter().map(|&l| GeoNum::from_log(l)).collect::<Result<Vec<_>>>()?,
        None => default_eps_grid(),
    };
    let cfg = AnalyzeConfig {
        m: a.m,
        lambda: load_lambda(&a.lambda, x.len())?,
        lambda_desc: a.lambda.clone(),
        analyses: Analysis::parse_list(&a.spaces)?,
        eps,
        tols: Tolerances { tol: a.tol, tail_fraction: a.tail },
        orlicz: OrliczFn::from_arg(&a.orlicz)?,
        p: load_p(&a.p)?,
        p_desc: a.p.clone(),
        tol_rho: a.tol_rho,
    };
    let report = analyze(&x, &cfg).map_err(|e| match e {
        Error::TooShort { .. } => input_failure(e),
        other => other.into(),
    })?;
    emit(&to_json(&report), a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_generate(g: &GenerateArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let family: Family = g.family.parse()?;
    let x = generate(&family, g.n)?;
    emit(&serialize_log(&x), g.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_selftest(
    s: &SelftestArgs,
    env_seed: Option<String>,
    out: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let seed = match env_seed {
        Some(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))?,
        None => s.seed,
    };
    let results = run_all(seed, s.cases);
    let mut text = format!("seed {seed}\n");
    for r in &results {
        let status = if r.ok() { "ok" } else { "FAILED" };
        text += &format!("{:<12} {:>6}/{:<6} {status}\n", r.name, r.passed, r.cases);
        for f in &r.failures {
            text += &format!("    {f}\n");
        }
    }
    let all_ok = results.iter().all(|r| r.ok());
    text += if all_ok { "all suites passed\n" } else { "some suites failed\n" };
    emit(&text, None, out)?;
    Ok(if all_ok { EXIT_OK } else { EXIT_SELFTEST_FAILED })
}
