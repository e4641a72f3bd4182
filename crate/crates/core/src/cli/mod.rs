//! The `qsrlab` command grammar, state files and run reports.

mod report;
mod statefile;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::entropies::{
    cond_mutual_information, d_half, dh_eps, dmax, entanglement_spread, fidelity, hmax_cond,
    hmin_cond, imax, mutual_information, relative_entropy, spread_ks, Bits, EntropyResult,
};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::protocol::{run_protocol, run_protocol_reversed, Partition, ProtocolConfig};
use crate::states::QuantumState;
use crate::verify::{asymptotic_sweep, run_suite, Suite};

pub use report::{
    load_report, round_sig, round_value, save_report, ErrorInfo, RunReport, SIGNIFICANT_DIGITS,
};
pub use statefile::{
    load_state, parse_state, save_state, LoadedState, RegisterSpec, StateFile, FORMAT_VERSION,
};

/// Exit code of a run whose checks failed.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "qsrlab",
    version,
    about = "Entropic quantities, redistribution protocol runs and inequality checks"
)]
struct Cli {
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an entropic quantity.
    Entropy(EntropyArgs),
    /// Simulate the redistribution protocol on a pure state.
    Protocol(ProtocolArgs),
    /// Run seeded inequality suites.
    Verify(VerifyArgs),
    /// D_H^eps of i.i.d. copies against n times the relative entropy.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Fidelity,
    Dmax,
    Dh,
    Dhalf,
    Rel,
    Mi,
    Cmi,
    Hmin,
    Hmax,
    Imax,
    Spread,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    quantity: Quantity,
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Register labels, e.g. A,B or A,B,C.
    #[arg(long)]
    partition: Option<String>,
}

#[derive(Debug, Args)]
struct ProtocolArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Labels playing R, A, B, C.
    #[arg(long, default_value = "R,A,B,C")]
    partition: String,
    #[arg(long = "sigma-c")]
    sigma_c: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    eps1: f64,
    #[arg(long, default_value_t = 0.1)]
    eps2: f64,
    /// Run the mirrored protocol (C starts with B) backwards.
    #[arg(long)]
    reversed: bool,
    /// Derive n and b from the entropic quantities even if given.
    #[arg(long)]
    derive_params: bool,
    /// Keep the state vector after every step in the report.
    #[arg(long)]
    store_states: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// hayashi-nagaoka, gentle, pgm, dh-chain, comparison, spread, convex-split or all.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    dims: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long = "n-max")]
    n_max: usize,
}

/// Outcome of a successfully executed command.
struct Outcome {
    config: Value,
    results: Value,
    seed: Option<u64>,
    checks_passed: bool,
}

fn bits_json(b: Bits) -> Value {
    serde_json::to_value(b).unwrap_or(Value::Null)
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "data": m.data().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    })
}

fn entropy_json(r: &EntropyResult) -> Value {
    let mut v = json!({ "value": bits_json(r.value) });
    if let Some((kind, m)) = &r.certificate {
        v["certificate"] = json!({ "kind": kind, "matrix": matrix_json(m) });
    }
    if let Some(s) = &r.solver {
        v["solver"] = serde_json::to_value(s).unwrap_or(Value::Null);
    }
    v
}

fn labels(partition: &Option<String>, count: usize, quantity: &str) -> Result<Vec<String>> {
    let p = partition.as_deref().ok_or_else(|| {
        Error::Parameter(format!(
            "--partition with {count} labels is required for {quantity}"
        ))
    })?;
    let parts: Vec<String> = p.split(',').map(|s| s.trim().to_string()).collect();
    if parts.len() != count || parts.iter().any(|s| s.is_empty()) {
        return Err(Error::Parameter(format!(
            "{quantity} needs --partition with {count} labels, got {p:?}"
        )));
    }
    Ok(parts)
}

/// Marginal on `groups` in that order, with the dimension of each group.
fn grouped(state: &QuantumState, groups: &[&str]) -> Result<(ComplexMatrix, Vec<usize>)> {
    let m = state.marginal(groups)?;
    let dims = groups
        .iter()
        .map(|l| state.layout().dim_of(l))
        .collect::<Result<Vec<_>>>()?;
    Ok((m.into_matrix(), dims))
}

fn need_sigma(args: &EntropyArgs, rho: &QuantumState) -> Result<ComplexMatrix> {
    let path = args
        .sigma
        .as_ref()
        .ok_or_else(|| Error::Parameter("--sigma is required for this quantity".into()))?;
    let sigma = load_state(path)?.density();
    if sigma.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "state has dimension {} but sigma has {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(sigma.into_matrix())
}

fn need_eps(args: &EntropyArgs) -> Result<f64> {
    args.eps
        .ok_or_else(|| Error::Parameter("--eps is required for this quantity".into()))
}

fn run_entropy(args: &EntropyArgs) -> Result<Outcome> {
    let loaded = load_state(&args.input)?;
    let rho = loaded.density();
    let name = format!("{:?}", args.quantity).to_lowercase();
    let results = match args.quantity {
        Quantity::Fidelity => {
            let s = need_sigma(args, &rho)?;
            json!({ "value": fidelity(rho.matrix(), &s)? })
        }
        Quantity::Dmax => entropy_json(&dmax(rho.matrix(), &need_sigma(args, &rho)?)?),
        Quantity::Dh => {
            let eps = need_eps(args)?;
            entropy_json(&dh_eps(rho.matrix(), &need_sigma(args, &rho)?, eps)?)
        }
        Quantity::Dhalf => {
            json!({ "value": bits_json(d_half(rho.matrix(), &need_sigma(args, &rho)?)?) })
        }
        Quantity::Rel => {
            json!({ "value": bits_json(relative_entropy(rho.matrix(), &need_sigma(args, &rho)?)?) })
        }
        Quantity::Mi => {
            let l = labels(&args.partition, 2, "mi")?;
            let (m, d) = grouped(&rho, &[&l[0], &l[1]])?;
            json!({ "value": mutual_information(&m, d[0], d[1])? })
        }
        Quantity::Cmi => {
            let l = labels(&args.partition, 3, "cmi")?;
            let (m, d) = grouped(&rho, &[&l[0], &l[1], &l[2]])?;
            json!({ "value": cond_mutual_information(&m, d[0], d[1], d[2])? })
        }
        Quantity::Hmin | Quantity::Hmax | Quantity::Imax => {
            let (m, da, db) = match &args.partition {
                Some(_) => {
                    let l = labels(&args.partition, 2, &name)?;
                    let (m, d) = grouped(&rho, &[&l[0], &l[1]])?;
                    (m, d[0], d[1])
                }
                // unconditional: a trivial conditioning system
                None if args.quantity != Quantity::Imax => (rho.matrix().clone(), rho.dim(), 1),
                None => return Err(Error::Parameter("imax needs --partition A,B".into())),
            };
            let r = match args.quantity {
                Quantity::Hmin => hmin_cond(&m, da, db)?,
                Quantity::Hmax => hmax_cond(&m, da, db)?,
                _ => imax(&m, da, db)?,
            };
            entropy_json(&r)
        }
        Quantity::Spread => match (&loaded, &args.partition) {
            (LoadedState::Pure(p), Some(_)) => {
                let l = labels(&args.partition, 2, "spread")?;
                serde_json::to_value(spread_ks(p, &l[0], &l[1])?).unwrap_or(Value::Null)
            }
            (_, Some(part)) => {
                let l: Vec<&str> = part.split(',').map(str::trim).collect();
                let m = rho.marginal(&l)?;
                serde_json::to_value(entanglement_spread(m.matrix())?).unwrap_or(Value::Null)
            }
            (_, None) => {
                serde_json::to_value(entanglement_spread(rho.matrix())?).unwrap_or(Value::Null)
            }
        },
    };
    Ok(Outcome {
        config: json!({
            "quantity": name,
            "in": args.input.display().to_string(),
            "sigma": args.sigma.as_ref().map(|p| p.display().to_string()),
            "eps": args.eps,
            "partition": args.partition,
        }),
        results: json!({ "quantity": name, "result": results }),
        seed: None,
        checks_passed: true,
    })
}

fn run_protocol_cmd(args: &ProtocolArgs) -> Result<Outcome> {
    let phi = load_state(&args.input)?.to_pure()?;
    let sigma_c = match &args.sigma_c {
        Some(p) => Some(load_state(p)?.density().into_matrix()),
        None => None,
    };
    let config = ProtocolConfig {
        partition: Partition::parse(&args.partition)?,
        sigma_c,
        n: args.n,
        b: args.b,
        eps1: args.eps1,
        eps2: args.eps2,
        seed: args.seed,
        derive_params: args.derive_params,
        smoothed_rbc: None,
        inject_mu: false,
        store_states: args.store_states,
    };
    let t = if args.reversed {
        run_protocol_reversed(&phi, &config)?
    } else {
        run_protocol(&phi, &config)?
    };
    let ok = t.max_residual <= 1e-8 && t.guarantee_met != Some(false);
    Ok(Outcome {
        config: json!({
            "in": args.input.display().to_string(),
            "partition": config.partition,
            "sigma_c": args.sigma_c.as_ref().map(|p| p.display().to_string()),
            "n": t.n,
            "b": t.b,
            "eps1": args.eps1,
            "eps2": args.eps2,
            "reversed": args.reversed,
            "derive_params": args.derive_params,
        }),
        results: json!({ "transcript": t }),
        seed: Some(args.seed),
        checks_passed: ok,
    })
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse::<Suite>().map_err(|_| {
            Error::Parameter(format!(
                "unknown suite {:?}; expected one of {} or all",
                args.suite,
                Suite::ALL.map(|s| s.name()).join(", ")
            ))
        })?]
    };
    let mut reports = Vec::new();
    for s in suites {
        reports.push(run_suite(s, args.trials, args.seed, args.dims)?);
    }
    let ok = reports.iter().all(|r| r.pass());
    Ok(Outcome {
        config: json!({
            "suite": args.suite,
            "trials": args.trials,
            "dims": args.dims,
        }),
        results: json!({ "suites": reports, "all_passed": ok }),
        seed: Some(args.seed),
        checks_passed: ok,
    })
}

fn run_sweep(args: &SweepArgs) -> Result<Outcome> {
    let rho = load_state(&args.input)?.density();
    let sigma = load_state(&args.sigma)?.density();
    let r = asymptotic_sweep(rho.matrix(), sigma.matrix(), args.eps, args.n_max)?;
    Ok(Outcome {
        config: json!({
            "in": args.input.display().to_string(),
            "sigma": args.sigma.display().to_string(),
            "eps": args.eps,
            "n_max": args.n_max,
        }),
        checks_passed: r.pass,
        results: serde_json::to_value(&r).unwrap_or(Value::Null),
        seed: None,
    })
}

fn usage_report(command: Vec<String>, message: String, code: i32) -> RunReport {
    RunReport {
        command,
        config: Value::Null,
        results: Value::Null,
        status: if code == 0 { "ok" } else { "error" }.into(),
        exit_code: code,
        error: (code != 0).then(|| ErrorInfo {
            code: "usage".into(),
            message,
        }),
        seed: None,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: 0.0,
    }
}

/// Parse and execute one command line (without the program name). Returns
/// the exit code (0 success, 1 failed check, 2 input error, 3 numeric
/// error) and the report. Clap's help and usage text, when produced, is
/// carried in `error.message` (code "usage"; exit 0 for --help/--version).
pub fn run_command<S: AsRef<str>>(argv: &[S]) -> (i32, RunReport) {
    let command: Vec<String> = argv.iter().map(|s| s.as_ref().to_string()).collect();
    let cli = match Cli::try_parse_from(
        std::iter::once("qsrlab".to_string()).chain(command.iter().cloned()),
    ) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let mut r = usage_report(command, e.render().to_string(), code);
            if code == 0 {
                r.results = Value::String(e.render().to_string());
            }
            return (code, r);
        }
    };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Entropy(a) => run_entropy(a),
        Command::Protocol(a) => run_protocol_cmd(a),
        Command::Verify(a) => run_verify(a),
        Command::Sweep(a) => run_sweep(a),
    };
    let wall = start.elapsed().as_secs_f64();
    let mut report = match outcome {
        Ok(o) => {
            let code = if o.checks_passed {
                0
            } else {
                EXIT_CHECK_FAILED
            };
            RunReport {
                command,
                config: o.config,
                results: o.results,
                status: if code == 0 { "ok" } else { "check_failed" }.into(),
                exit_code: code,
                error: None,
                seed: o.seed,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                wall_time_s: wall,
            }
        }
        Err(e) => RunReport {
            command,
            config: Value::Null,
            results: Value::Null,
            status: "error".into(),
            exit_code: e.exit_code(),
            error: Some(ErrorInfo {
                code: e.code().into(),
                message: e.to_string(),
            }),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: wall,
        },
    };
    round_value(&mut report.config);
    round_value(&mut report.results);
    if let Some(path) = &cli.out {
        if let Err(e) = save_report(&report, path) {
            report.status = "error".into();
            report.exit_code = e.exit_code();
            report.error = Some(ErrorInfo {
                code: e.code().into(),
                message: e.to_string(),
            });
        }
    }
    (report.exit_code, report)
}

/// Convenience for examples and tests: write a state file next to others.
pub fn write_state_file(dir: &Path, name: &str, file: &StateFile) -> Result<PathBuf> {
    let path = dir.join(name);
    save_state(file, &path)?;
    Ok(path)
}
