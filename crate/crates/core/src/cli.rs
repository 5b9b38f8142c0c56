//! Command-line front end: JSON tuples in, JSON reports out.
//!
//! Exit status is 0 on success, 1 when the library rejects the input on
//! mathematical grounds, and 2 for usage or parse errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::algebra::Algebra;
use crate::hilbert::{gen_oracle, ModuleElement, ModuleSpace, ModuleTuple};
use crate::stable_rank::{
    bass_reduce, density_experiment, hv_pad, hv_perturb, normalize, sr_formula, standard_padding,
    PerturbationParams, DEFAULT_MAX_RETRIES,
};
use crate::verify::{self, SuiteOptions};
use crate::DEFAULT_TOL;

/// Environment variable that replaces the default tolerance.
pub const TOL_ENV: &str = "CSTAR_RANK_TOL";

#[derive(Parser, Debug)]
#[command(
    name = "cstar-rank",
    version,
    about = "Unimodular tuples and stable rank of matrix modules over finite-dimensional C*-algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file holding a tuple (array of elements) or a single element.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0.1)]
    eps: f64,
    /// Invertibility tolerance [default: 1e-9, or $CSTAR_RANK_TOL].
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_RETRIES)]
    max_retries: usize,
    /// Omit wall time so that reports are byte-identical across runs.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Stable rank of M_{n×m}(A) from sr(A).
    SrFormula {
        #[arg(long)]
        sr_a: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Unimodularity of a tuple, with the generator oracle as a second opinion.
    Check,
    /// A dual witness y with sum <y_k, x_k> = 1.
    Dual,
    /// Reduce a unimodular (n+1)-tuple to a unimodular n-tuple.
    Reduce,
    /// Pad a tuple with the standard padding scaled by (1 - <x,x>/eps)+.
    Pad,
    /// Move a tuple to a unimodular one within sqrt(eps) + eps.
    Perturb,
    /// Monte-Carlo fraction of unimodular k-tuples in M_{rows×cols}(A).
    Density {
        /// Block sizes of A, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        k: usize,
    },
    /// Run the acceptance battery and print a pass/fail table.
    VerifySuite {
        /// Tenfold smaller sample counts.
        #[arg(long)]
        quick: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SrFormula { .. } => "sr-formula",
            Command::Check => "check",
            Command::Dual => "dual",
            Command::Reduce => "reduce",
            Command::Pad => "pad",
            Command::Perturb => "perturb",
            Command::Density { .. } => "density",
            Command::VerifySuite { .. } => "verify-suite",
        }
    }
}

/// Effective configuration of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub eps: f64,
    pub tol: f64,
    pub seed: u64,
    pub trials: usize,
    pub max_retries: usize,
    pub out_path: Option<PathBuf>,
    /// Include `wall_time_ms` in the report.
    pub timestamp: bool,
    pub quick: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Argument parsing failed, or help/version was requested.
    Clap(clap::Error),
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Domain(m) => write!(f, "{m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// What a successful run prints and how it exits.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub stdout: String,
    pub status: i32,
}

/// Parses command-line arguments into a validated [`RunConfig`].
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Clap)?;
    let tol = match cli.tol {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(v) => v
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    let quick = matches!(cli.command, Command::VerifySuite { quick: true });
    let config = RunConfig {
        command: cli.command,
        input_path: cli.input,
        eps: cli.eps,
        tol,
        seed: cli.seed,
        trials: cli.trials,
        max_retries: cli.max_retries,
        out_path: cli.out,
        timestamp: !cli.no_timestamp,
        quick,
    };
    validate(&config)?;
    Ok(config)
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    if !(c.eps > 0.0 && c.eps.is_finite()) {
        return Err(CliError::Usage(format!(
            "--eps must be positive, got {}",
            c.eps
        )));
    }
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "tolerance must be positive, got {}",
            c.tol
        )));
    }
    if c.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if c.max_retries == 0 {
        return Err(CliError::Usage("--max-retries must be at least 1".into()));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TupleInput {
    Many(ModuleTuple),
    One(ModuleElement),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PadInput {
    x: TupleInput,
    u: Option<TupleInput>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PadFile {
    WithPadding(PadInput),
    Plain(TupleInput),
}

impl From<TupleInput> for ModuleTuple {
    fn from(t: TupleInput) -> Self {
        match t {
            TupleInput::Many(t) => t,
            TupleInput::One(x) => ModuleTuple::single(x),
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    let path = path.ok_or_else(|| CliError::Usage("this command needs --input <FILE>".into()))?;
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(
    text: &str,
    path: Option<&Path>,
) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let name = path.map(|p| p.display().to_string()).unwrap_or_default();
        CliError::Usage(format!(
            "{name}: invalid input at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn read_tuple(config: &RunConfig) -> Result<ModuleTuple, CliError> {
    let path = config.input_path.as_deref();
    let text = read_input(path)?;
    Ok(parse_json::<TupleInput>(&text, path)?.into())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library values serialize")
}

fn params(config: &RunConfig) -> Result<PerturbationParams, CliError> {
    Ok(PerturbationParams::new(
        config.eps,
        config.tol,
        config.max_retries,
        config.seed,
    )?)
}

fn unit_residual(a: &crate::AlgebraElement) -> f64 {
    a.distance(&a.algebra().unit()).unwrap_or(f64::INFINITY)
}

/// Runs one command. The report goes to `config.out_path` when set, and
/// otherwise into the returned `stdout`.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    validate(config)?;
    if let Command::SrFormula { sr_a, n, m } = config.command {
        let value = sr_formula(sr_a, n, m)?;
        return emit(config, format!("{value}\n"), 0);
    }
    let start = Instant::now();
    let (result, residuals, status) = dispatch(config)?;
    let mut report = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": crate::VERSION,
        "command": config.command.name(),
        "tolerance": config.tol,
        "seed": config.seed,
        "parameters": {
            "eps": config.eps,
            "trials": config.trials,
            "max_retries": config.max_retries,
        },
        "result": result,
        "residuals": residuals,
    });
    if config.timestamp {
        report["wall_time_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(config, text, status)
}

fn emit(config: &RunConfig, text: String, status: i32) -> Result<RunOutput, CliError> {
    match &config.out_path {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(RunOutput {
                stdout: String::new(),
                status,
            })
        }
        None => Ok(RunOutput {
            stdout: text,
            status,
        }),
    }
}

fn dispatch(config: &RunConfig) -> Result<(Value, Value, i32), CliError> {
    let tol = config.tol;
    match &config.command {
        Command::SrFormula { .. } => unreachable!("handled before dispatch"),
        Command::Check => {
            let t = read_tuple(config)?;
            let margin = t.unimodularity_margin(tol);
            Ok((
                json!({
                    "unimodular": margin > 1.0,
                    "generates": gen_oracle(&t, tol),
                    "margin": margin,
                    "length": t.len(),
                }),
                json!({}),
                0,
            ))
        }
        Command::Dual => {
            let t = read_tuple(config)?;
            let y = t.dual_witness(tol)?;
            let residual = unit_residual(&y.inner_right(&t)?);
            Ok((
                json!({ "dual": to_value(&y) }),
                json!({ "duality": residual }),
                0,
            ))
        }
        Command::Reduce => {
            let t = read_tuple(config)?;
            let red = bass_reduce(&t, &params(config)?)?;
            let duality = unit_residual(&red.dual.inner_right(&t)?);
            Ok((
                json!({
                    "reduced": to_value(&red.reduced),
                    "coefficients": to_value(&red.coefficients),
                    "dual": to_value(&red.dual),
                    "eta": red.eta,
                    "attempts": red.attempts,
                    "unimodularity_margin": red.reduced.unimodularity_margin(tol),
                }),
                json!({ "telescoping": red.telescoping_residual, "duality": duality }),
                0,
            ))
        }
        Command::Pad => {
            let path = config.input_path.as_deref();
            let text = read_input(path)?;
            let (x, u): (ModuleTuple, ModuleTuple) = match parse_json::<PadFile>(&text, path)? {
                PadFile::Plain(x) => {
                    let x: ModuleTuple = x.into();
                    let u = standard_padding(x.space())?;
                    (x, u)
                }
                PadFile::WithPadding(PadInput { x, u }) => {
                    let x: ModuleTuple = x.into();
                    let u = match u {
                        Some(u) => normalize(&u.into())?,
                        None => standard_padding(x.space())?,
                    };
                    (x, u)
                }
            };
            let padded = hv_pad(&x, &u, config.eps)?;
            Ok((
                json!({
                    "padded": to_value(&padded),
                    "unimodular": padded.is_unimodular(tol),
                    "unimodularity_margin": padded.unimodularity_margin(tol),
                }),
                json!({ "normalization": unit_residual(&u.gram()) }),
                0,
            ))
        }
        Command::Perturb => {
            let t = read_tuple(config)?;
            let out = hv_perturb(&t, &params(config)?)?;
            Ok((
                json!({
                    "perturbed": to_value(&out.perturbed),
                    "distance": out.distance,
                    "bound": out.bound,
                    "coefficients": to_value(&out.coefficients),
                    "coefficient_norm": out.coefficient_norm,
                    "k": out.k,
                    "padding_length": out.padding_len,
                    "unimodularity_margin": out.perturbed.unimodularity_margin(tol),
                }),
                json!({ "distance_slack": out.bound - out.distance }),
                0,
            ))
        }
        Command::Density {
            blocks,
            rows,
            cols,
            k,
        } => {
            let alg = Algebra::new(blocks.clone())?;
            let space = ModuleSpace::matrix(&alg, *rows, *cols)?;
            let report = density_experiment(&space, *k, config.trials, config.seed, tol)?;
            Ok((to_value(&report), json!({}), 0))
        }
        Command::VerifySuite { .. } => {
            let opts = SuiteOptions {
                seed: config.seed,
                tol,
                quick: config.quick,
            };
            let outcomes = verify::run_all(&opts);
            for o in &outcomes {
                eprintln!("{o}");
            }
            let all = outcomes.iter().all(|o| o.passed);
            Ok((
                json!({ "passed": all, "quick": config.quick, "criteria": to_value(&outcomes) }),
                json!({}),
                if all { 0 } else { 1 },
            ))
        }
    }
}

/// Entry point shared by the binary: parse, run, print, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = parse_args(args).and_then(|c| run(&c));
    match outcome {
        Ok(out) => {
            print!("{}", out.stdout);
            out.status
        }
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_density_flags() {
        let c = parse_args([
            "cstar-rank",
            "density",
            "--blocks",
            "1,2",
            "--rows",
            "1",
            "--cols",
            "2",
            "--k",
            "2",
            "--seed",
            "7",
        ])
        .unwrap();
        assert_eq!(
            c.command,
            Command::Density {
                blocks: vec![1, 2],
                rows: 1,
                cols: 2,
                k: 2
            }
        );
        assert_eq!((c.seed, c.trials), (7, 1000));
        assert!(c.timestamp);
    }

    #[test]
    fn sr_formula_prints_value() {
        let c = parse_args([
            "cstar-rank",
            "sr-formula",
            "--sr-a",
            "2",
            "--n",
            "3",
            "--m",
            "5",
        ])
        .unwrap();
        assert_eq!(run(&c).unwrap().stdout, "2\n");
    }

    #[test]
    fn usage_errors_exit_two() {
        let e = parse_args(["cstar-rank", "frobnicate"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse_args(["cstar-rank", "check", "--eps", "-1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let c = parse_args(["cstar-rank", "check"]).unwrap();
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn domain_errors_exit_one() {
        let c = parse_args([
            "cstar-rank",
            "sr-formula",
            "--sr-a",
            "0",
            "--n",
            "1",
            "--m",
            "1",
        ])
        .unwrap();
        assert_eq!(run(&c).unwrap_err().exit_code(), 1);
    }
}
