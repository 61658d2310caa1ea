//! `rcircular`: batch front end over the moment, cumulant, Monte Carlo and
//! Cuntz-Krieger engines.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 config error,
//! 3 size cap exceeded.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rcircular_cli::commands::{self, Command, CommandError};
use rcircular_cli::config::{parse_config, DiagnosticKind};
use rcircular_cli::output;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SIZE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "rcircular",
    version,
    about = "Moments, cyclic cumulants and Gaussian block-matrix checks for matricially free circular arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Report destination (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Degree cap for series and R-transforms.
    #[arg(long, global = true)]
    cap: Option<usize>,

    #[arg(long = "tolerance-rel", global = true)]
    tolerance_rel: Option<f64>,

    #[arg(long = "tolerance-z", global = true)]
    tolerance_z: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Moments from adapted colored pairings, with contributions.
    Moment,
    /// Moments as Fock-space vacuum expectations.
    FockMoment,
    /// Cyclic cumulants.
    Cumulant,
    /// Cyclic R-transforms compared with the quadratic covariance form.
    Rtransform,
    /// Moment series and their functional relations.
    Series,
    /// Kesten closed form against the general engine, optionally Monte Carlo.
    Kesten,
    /// Meixner closed form against the Fock engine, optionally Monte Carlo.
    Meixner,
    /// Monte Carlo partial-trace estimates of matrix words.
    Simulate,
    /// Combinatorial, Fock and optional Monte Carlo values of the same words.
    Crossval,
    /// Cuntz-Krieger relations on a truncated Fock space.
    CkCheck {
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        labels: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Pairs J as "p,q;p,q" (1-based).
        #[arg(long)]
        pairs: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("rcircular: {msg}");
    ExitCode::from(code)
}

fn parse_pairs(s: &str) -> Result<Value, String> {
    s.split(';')
        .filter(|x| !x.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [p, q] => {
                    let p: u64 = p.parse().map_err(|_| format!("bad pair {pair:?}"))?;
                    let q: u64 = q.parse().map_err(|_| format!("bad pair {pair:?}"))?;
                    Ok(json!([p, q]))
                }
                _ => Err(format!("bad pair {pair:?}, expected \"p,q\"")),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
}

/// Folds command-line overrides into the raw config so the embedded copy
/// reproduces the run.
fn apply_overrides(raw: &mut Value, cli: &Cli) -> Result<(), String> {
    let obj = raw.as_object_mut().ok_or("config must be a JSON object")?;
    if let Some(s) = cli.seed {
        obj.insert("seed".into(), json!(s));
    }
    if let Some(t) = cli.trials {
        obj.insert("trials".into(), json!(t));
    }
    if let Some(c) = cli.cap {
        obj.insert("cap".into(), json!(c));
    }
    if cli.tolerance_rel.is_some() || cli.tolerance_z.is_some() {
        let tol = obj.entry("tolerance").or_insert_with(|| json!({}));
        if let Some(t) = tol.as_object_mut() {
            if let Some(x) = cli.tolerance_rel {
                t.insert("rel".into(), json!(x));
            }
            if let Some(x) = cli.tolerance_z {
                t.insert("z".into(), json!(x));
            }
        }
    }
    if let Cmd::CkCheck {
        r,
        labels,
        depth,
        pairs,
    } = &cli.command
    {
        let ck = obj.entry("ck").or_insert_with(|| json!({}));
        let ck = ck.as_object_mut().ok_or("\"ck\" must be an object")?;
        if let Some(x) = r {
            ck.insert("r".into(), json!(x));
        }
        if let Some(x) = labels {
            ck.insert("labels".into(), json!(x));
        }
        if let Some(x) = depth {
            ck.insert("depth".into(), json!(x));
        }
        if let Some(p) = pairs {
            ck.insert("pairs".into(), parse_pairs(p)?);
        }
    }
    Ok(())
}

fn command_of(cmd: &Cmd) -> Command {
    match cmd {
        Cmd::Moment => Command::Moment,
        Cmd::FockMoment => Command::FockMoment,
        Cmd::Cumulant => Command::Cumulant,
        Cmd::Rtransform => Command::RTransform,
        Cmd::Series => Command::Series,
        Cmd::Kesten => Command::Kesten,
        Cmd::Meixner => Command::Meixner,
        Cmd::Simulate => Command::Simulate,
        Cmd::Crossval => Command::Crossval,
        Cmd::CkCheck { .. } => Command::CkCheck,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut raw = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    return fail(EXIT_CONFIG, &format!("cannot read {}: {e}", path.display()))
                }
            };
            match serde_json::from_str::<Value>(&text) {
                Ok(v) => v,
                Err(e) => {
                    return fail(
                        EXIT_CONFIG,
                        &format!("{} is not valid JSON: {e}", path.display()),
                    )
                }
            }
        }
        None => json!({}),
    };
    if let Err(e) = apply_overrides(&mut raw, &cli) {
        return fail(EXIT_CONFIG, &e);
    }
    let cfg = match parse_config(&raw) {
        Ok(c) => c,
        Err(diags) => {
            for d in &diags {
                eprintln!("rcircular: config {d}");
            }
            let code = if diags.iter().all(|d| d.kind == DiagnosticKind::Cap) {
                EXIT_SIZE
            } else {
                EXIT_CONFIG
            };
            return ExitCode::from(code);
        }
    };
    let command = command_of(&cli.command);
    let outcome = match commands::run(command, &cfg) {
        Ok(o) => o,
        Err(CommandError::Config(m)) => return fail(EXIT_CONFIG, &m),
        Err(CommandError::Size(m)) => return fail(EXIT_SIZE, &m),
    };
    let report = json!({
        "command": command.name(),
        "pass": outcome.pass,
        "provenance": {
            "library": "rcircular",
            "version": rcircular::VERSION,
            "engines": outcome.engines,
        },
        "elapsed_seconds": start.elapsed().as_secs_f64(),
        "config": raw,
        "summary": outcome.summary,
        "results": outcome.rows,
    });
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => match output::to_csv(&outcome.rows) {
            Ok(t) => t,
            Err(e) => return fail(EXIT_CONFIG, &format!("csv output: {e}")),
        },
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                return fail(
                    EXIT_CONFIG,
                    &format!("cannot write {}: {e}", path.display()),
                );
            }
        }
        None => print!("{text}"),
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("rcircular: {} check failed", command.name());
        ExitCode::from(EXIT_FAIL)
    }
}
