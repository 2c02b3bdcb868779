//! `pmzv`: evaluate parametrized multiple zeta series, apply the word
//! operators, and run identity verification suites.
//!
//! Exit status: 0 on success, 1 when a verified identity fails, 2 on invalid
//! input or flags, 3 when an evaluation misses its tolerance.

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use pmzv::verifier::{default_grid, run_suite, suite_eval_config};
use pmzv::{
    dual, eval_hstar, eval_hurwitz, eval_z, eval_zstar, format_complex, parse_complex, parse_word, sigma_b1,
    sigma_b2, sigma_eps, EvalConfig, EvalError, Evaluation, LinComb, Params, RVector, Suite, SuiteConfig,
    VerificationReport, Word,
};
use serde::Serialize;

const EXIT_FAILED_IDENTITY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pmzv", version, about = "Parametrized multiple zeta series and their duality identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one series.
    Compute(ComputeArgs),
    /// Print the dual word τ(w).
    Dual(DualArgs),
    /// Apply a σ-operator and print the exact linear combination.
    Sigma(SigmaArgs),
    /// Run an identity verification suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Output {
    Json,
    Csv,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyArg {
    /// Z(w; (α, β)).
    #[value(name = "Z")]
    Z,
    /// Z*_r(w; (α, β)), first slot the Pochhammer base.
    #[value(name = "Zstar")]
    Zstar,
    /// Multiple Hurwitz zeta value ζ(w; α).
    #[value(name = "zeta")]
    Zeta,
    /// H*_r(w; α).
    #[value(name = "Hstar")]
    Hstar,
}

impl FamilyArg {
    fn label(self) -> &'static str {
        match self {
            FamilyArg::Z => "Z",
            FamilyArg::Zstar => "Zstar",
            FamilyArg::Zeta => "zeta",
            FamilyArg::Hstar => "Hstar",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SigmaOp {
    /// σ^{b,1}: binomials C(k_i+r_i-1, r_i), last C(k_p+r_p-2, r_p).
    B1,
    /// σ^ε: unit coefficients on positions followed by a strict cut and the last.
    Eps,
    /// σ^{b,2}: binomials C(k_i+r_i-1, r_i) everywhere.
    B2,
}

fn parse_word_arg(text: &str) -> Result<Word, String> {
    parse_word(text).map_err(|e| e.to_string())
}

fn parse_rvector(text: &str) -> Result<RVector, String> {
    text.parse::<RVector>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct EvalFlags {
    /// Relative tolerance of the extrapolated value.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Largest truncation point.
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[arg(long, value_enum, ignore_case = true)]
    family: FamilyArg,
    /// Word in composition form (`1:1,1/2:2`) or letters (`1h0`); `""` is the empty word.
    #[arg(long, value_parser = parse_word_arg, allow_hyphen_values = true)]
    word: Word,
    /// First parameter, e.g. `1.5` or `1.5+0.3i`.
    #[arg(long, value_parser = parse_complex, default_value = "1", allow_hyphen_values = true)]
    alpha: Complex64,
    /// Second parameter (defaults to alpha); unused by zeta and Hstar.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    beta: Option<Complex64>,
    /// Comma-separated r-vector for Zstar and Hstar (defaults to all zeros).
    #[arg(long = "r-vector", value_parser = parse_rvector)]
    r_vector: Option<RVector>,
    #[command(flatten)]
    eval: EvalFlags,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

#[derive(Args, Debug)]
struct DualArgs {
    #[arg(long, value_parser = parse_word_arg, allow_hyphen_values = true)]
    word: Word,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

#[derive(Args, Debug)]
struct SigmaArgs {
    #[arg(long, value_enum)]
    op: SigmaOp,
    #[arg(long, value_parser = parse_word_arg, allow_hyphen_values = true)]
    word: Word,
    /// Total increment r.
    #[arg(long)]
    r: u32,
    /// Apply the operator to τ(w) instead of w.
    #[arg(long)]
    on_dual: bool,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// duality, thm11i, thm11ii, prop24, thm31, sum-formula, integral or derivative.
    #[arg(long)]
    suite: Suite,
    #[arg(long, default_value_t = 4)]
    weight_max: u32,
    #[arg(long, default_value_t = 16)]
    depth_max: usize,
    #[arg(long, default_value_t = 2)]
    r_max: u32,
    /// `default` for {0.6, 1, 1.5}², or comma-separated values whose square
    /// grid is used (complex values allowed, e.g. `1,0.8+0.2i`).
    #[arg(long, default_value = "default")]
    grid: String,
    /// Upper bound on the per-check tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Only even r.
    #[arg(long)]
    even_only: bool,
    /// Run at most this many checks, chosen pseudo-randomly from the seed.
    #[arg(long)]
    max_items: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest truncation point of the series evaluations.
    #[arg(long)]
    max_n: Option<usize>,
    /// Omit the timestamp from the JSON report.
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

/// Failure of a subcommand, mapped to an exit status.
enum Failure {
    Usage(String),
    Tolerance(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// large magnitudes.
fn fmt_f64(x: f64) -> String {
    if x == 0.0 || (1e-4..1e16).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn parse_grid(text: &str) -> Result<Vec<Params>, String> {
    if text.trim() == "default" {
        return Ok(default_grid());
    }
    let values = text
        .split(',')
        .map(|v| parse_complex(v.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(values
        .iter()
        .flat_map(|&a| values.iter().map(move |&b| Params::new(a, b)))
        .collect())
}

#[derive(Serialize)]
struct ComputeRecord {
    family: &'static str,
    word: String,
    alpha: String,
    beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<Vec<u32>>,
    value_re: f64,
    value_im: f64,
    err_estimate: f64,
    n_used: usize,
    converged: bool,
}

fn cmd_compute(args: &ComputeArgs, out: &mut impl Write) -> Result<(), Failure> {
    let mut cfg = EvalConfig {
        rel_tol: args.eval.rel_tol,
        ..EvalConfig::default()
    };
    if let Some(n) = args.eval.max_n {
        cfg.max_n = n;
    }
    let beta = args.beta.unwrap_or(args.alpha);
    let p = Params::new(args.alpha, beta);
    let uses_r = matches!(args.family, FamilyArg::Zstar | FamilyArg::Hstar);
    if args.r_vector.is_some() && !uses_r {
        return Err(Failure::Usage(format!("--r-vector does not apply to family {}", args.family.label())));
    }
    let r = args.r_vector.clone().unwrap_or_else(|| RVector::zeros(args.word.depth()));
    let result = match args.family {
        FamilyArg::Z => eval_z(&args.word, &p, &cfg),
        FamilyArg::Zstar => eval_zstar(&args.word, &r, &p, &cfg),
        FamilyArg::Zeta => eval_hurwitz(&args.word, args.alpha, &cfg),
        FamilyArg::Hstar => eval_hstar(&args.word, &r, args.alpha, &cfg),
    };
    let (eval, shortfall): (Evaluation, Option<String>) = match result {
        Ok(e) => (e, None),
        Err(EvalError::ToleranceNotReached { best }) => {
            let msg = EvalError::ToleranceNotReached { best }.to_string();
            (best, Some(msg))
        }
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    let two_params = matches!(args.family, FamilyArg::Z | FamilyArg::Zstar);
    let record = ComputeRecord {
        family: args.family.label(),
        word: args.word.to_string(),
        alpha: format_complex(args.alpha),
        beta: two_params.then(|| format_complex(beta)),
        r: uses_r.then(|| r.0.clone()),
        value_re: eval.value.re,
        value_im: eval.value.im,
        err_estimate: eval.err_estimate,
        n_used: eval.n_used,
        converged: eval.converged,
    };
    match args.output {
        Output::Json => writeln!(out, "{}", serde_json::to_string_pretty(&record).expect("record serializes"))?,
        Output::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "family", "word", "alpha", "beta", "r", "value_re", "value_im", "err_estimate", "n_used", "converged",
            ])?;
            let r_text = record.r.as_ref().map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
            w.write_record([
                record.family.to_string(),
                record.word.clone(),
                record.alpha.clone(),
                record.beta.clone().unwrap_or_default(),
                r_text.unwrap_or_default(),
                fmt_f64(record.value_re),
                fmt_f64(record.value_im),
                fmt_f64(record.err_estimate),
                record.n_used.to_string(),
                record.converged.to_string(),
            ])?;
            w.flush()?;
        }
        Output::Table => {
            writeln!(out, "value         {}", format_complex(eval.value))?;
            writeln!(out, "err_estimate  {:.2e}", eval.err_estimate)?;
            writeln!(out, "n_used        {}", eval.n_used)?;
        }
    }
    match shortfall {
        None => Ok(()),
        Some(msg) => Err(Failure::Tolerance(msg)),
    }
}

fn cmd_dual(args: &DualArgs, out: &mut impl Write) -> Result<(), Failure> {
    let d = dual(&args.word);
    match args.output {
        Output::Json => {
            let v = serde_json::json!({
                "word": args.word.to_string(),
                "letters": args.word.letter_string(),
                "dual": d.to_string(),
                "dual_letters": d.letter_string(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json value serializes"))?;
        }
        Output::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["word", "letters", "dual", "dual_letters"])?;
            w.write_record([args.word.to_string(), args.word.letter_string(), d.to_string(), d.letter_string()])?;
            w.flush()?;
        }
        Output::Table => {
            writeln!(out, "{} = {}", args.word, args.word.letter_string())?;
            writeln!(out, "dual: {} = {}", d, d.letter_string())?;
        }
    }
    Ok(())
}

fn cmd_sigma(args: &SigmaArgs, out: &mut impl Write) -> Result<(), Failure> {
    let base = if args.on_dual { dual(&args.word) } else { args.word.clone() };
    let l: LinComb = match args.op {
        SigmaOp::B1 => sigma_b1(&base, args.r),
        SigmaOp::Eps => sigma_eps(&base, args.r),
        SigmaOp::B2 => sigma_b2(&base, args.r),
    };
    match args.output {
        Output::Json => writeln!(out, "{}", serde_json::to_string_pretty(&l.to_json()).expect("json value serializes"))?,
        Output::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["coeff_num", "coeff_den", "word", "letters"])?;
            for (word, c) in l.iter() {
                w.write_record([c.numer().to_string(), c.denom().to_string(), word.to_string(), word.letter_string()])?;
            }
            w.flush()?;
        }
        Output::Table => {
            if l.is_empty() {
                writeln!(out, "0")?;
            }
            for (word, c) in l.iter() {
                writeln!(out, "{:>8}  {}", c.to_string(), word)?;
            }
        }
    }
    Ok(())
}

fn write_report(report: &VerificationReport, output: Output, out: &mut impl Write) -> Result<(), Failure> {
    match output {
        Output::Json => writeln!(out, "{}", report.to_json())?,
        Output::Table => write!(out, "{}", report.to_table())?,
        Output::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["name", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_dev", "tol", "passed"])?;
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    fmt_f64(c.lhs.re),
                    fmt_f64(c.lhs.im),
                    fmt_f64(c.rhs.re),
                    fmt_f64(c.rhs.im),
                    fmt_f64(c.rel_dev),
                    fmt_f64(c.tol),
                    c.passed.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Returns whether every check passed.
fn cmd_verify(args: &VerifyArgs, out: &mut impl Write) -> Result<bool, Failure> {
    let mut eval = suite_eval_config();
    if let Some(n) = args.max_n {
        eval.max_n = n;
    }
    let sc = SuiteConfig {
        weight_max: args.weight_max,
        depth_max: args.depth_max,
        r_max: args.r_max,
        params_grid: parse_grid(&args.grid).map_err(Failure::Usage)?,
        tol: args.tol,
        even_r_only: args.even_only,
        rng_seed: args.seed,
        max_items: args.max_items,
        eval,
    };
    sc.validate().map_err(Failure::Usage)?;
    let mut report = run_suite(args.suite, &sc);
    if !args.no_timestamp {
        report.stamp();
    }
    write_report(&report, args.output, out)?;
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Compute(a) => cmd_compute(a, &mut out).map(|_| true),
        Command::Dual(a) => cmd_dual(a, &mut out).map(|_| true),
        Command::Sigma(a) => cmd_sigma(a, &mut out).map(|_| true),
        Command::Verify(a) => cmd_verify(a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("pmzv: at least one identity check failed");
            ExitCode::from(EXIT_FAILED_IDENTITY)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("pmzv: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Tolerance(msg)) => {
            eprintln!("pmzv: {msg}");
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("pmzv: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
