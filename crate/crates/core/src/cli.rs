//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{apply_env, parse_config, parse_override, RunConfig, DEFAULT_TOML};
use crate::error::{Error, Result};
use crate::mc_engine::{asymptotic_for, convergence_study, estimate_ruin_with, RuinType};
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "biruin", version, about = "Finite-time ruin probabilities of a bidimensional perturbed risk model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimates of every ruin probability.
    Simulate(RunArgs),
    /// Asymptotic approximations at the configured capital.
    Asymptotics(RunArgs),
    /// Estimates and approximations along the study capital grid.
    Study(RunArgs),
    /// Structural, statistical and numerical self-checks.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML config file. Only `verify` may omit it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set mc.seed=7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Formats a float for CSV with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn load(name: &str, args: &RunArgs) -> Result<RunConfig> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", p.display())))?,
        None if name == "verify" => DEFAULT_TOML.to_string(),
        None => return Err(Error::config("--config", format!("required for `{name}`"))),
    };
    let overrides = args.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    let mut cfg = parse_config(&text, &overrides)?;
    apply_env(&mut cfg, &overrides)?;
    Ok(cfg)
}

pub fn simulate_csv(cfg: &RunConfig) -> Result<String> {
    let est = estimate_ruin_with(&cfg.model, &cfg.mc)?;
    let mut s = String::from("ruin_type,n,p_hat,ci_lo,ci_hi\n");
    for kind in RuinType::ALL {
        let e = est.get(kind);
        let _ = writeln!(s, "{},{},{},{},{}", kind, e.n, fmt_f64(e.p_hat), fmt_f64(e.ci_lo), fmt_f64(e.ci_hi));
    }
    Ok(s)
}

pub fn asymptotics_csv(cfg: &RunConfig) -> Result<String> {
    let m = &cfg.model;
    let mut s = String::from("case_id,u1,u2,value,warn_gt_one\n");
    for kind in [RuinType::Max, RuinType::Min, RuinType::Sum, RuinType::And, RuinType::Comp1, RuinType::Comp2] {
        let a = asymptotic_for(m, kind, m.u1, m.u2)?;
        let _ =
            writeln!(s, "{},{},{},{},{}", a.case_id, fmt_f64(a.u1), fmt_f64(a.u2), fmt_f64(a.value), a.warn_gt_one());
    }
    Ok(s)
}

pub fn study_csv(cfg: &RunConfig) -> Result<String> {
    let rows = convergence_study(&cfg.model, &cfg.study_grid, &cfg.mc)?;
    let mut s = String::from("u1,u2,ruin_type,n,p_hat,ci_lo,ci_hi,asym,ratio\n");
    for row in rows {
        let e = row.estimate;
        let ratio = row.ratio().map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(row.u1),
            fmt_f64(row.u2),
            row.ruin_type,
            e.n,
            fmt_f64(e.p_hat),
            fmt_f64(e.ci_lo),
            fmt_f64(e.ci_hi),
            fmt_f64(row.asym.value),
            ratio
        );
    }
    Ok(s)
}

fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Quadrature { .. } => EXIT_NUMERIC,
        Error::Io(_) => EXIT_NUMERIC,
        Error::Config { .. } | Error::InvalidParameter { .. } => EXIT_CONFIG,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Asymptotics(a) => ("asymptotics", a),
        Command::Study(a) => ("study", a),
        Command::Verify(a) => ("verify", a),
    };
    let cfg = match load(name, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    eprintln!("# resolved config");
    for line in cfg.to_flat_toml().lines() {
        eprintln!("# {line}");
    }
    for w in cfg.model.warnings() {
        eprintln!("warning: {w}");
    }

    let result = match cli.command {
        Command::Simulate(_) => simulate_csv(&cfg),
        Command::Asymptotics(_) => asymptotics_csv(&cfg),
        Command::Study(_) => study_csv(&cfg),
        Command::Verify(_) => match run_suite(&cfg) {
            Ok(checks) => {
                let mut s = String::new();
                for c in &checks {
                    let _ = writeln!(s, "{c}");
                }
                let failed = checks.iter().filter(|c| !c.passed).count();
                let _ = writeln!(s, "{} checks, {} failed", checks.len(), failed);
                if let Err(e) = emit(&args.out, &s) {
                    eprintln!("error: {e}");
                    return exit_code_of(&e);
                }
                return if failed == 0 { EXIT_OK } else { EXIT_VERIFY };
            }
            Err(e) => Err(e),
        },
    };
    match result.and_then(|text| emit(&args.out, &text)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_of(&e)
        }
    }
}
