use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metastab_core::Error;
use metastab_lab::fuzz::{run_suite, Suite};
use metastab_lab::output::render;
use metastab_lab::verify::{parse_document, verify_document};
use metastab_lab::{load_scenarios, run_all, Format, Status};

/// Batch runner for metastability checks, rates and bounds.
///
/// Every flag can also be set through an environment variable with the
/// `METASTAB_` prefix, e.g. `METASTAB_CAP=5000`.
#[derive(Parser, Debug)]
#[command(name = "metastab", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the scenarios in a file (the default).
    Run(RunArgs),
    /// Re-check a JSON run document: re-run every scenario and replay every claim.
    VerifyCert(VerifyArgs),
    /// Run a seeded fuzz suite.
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario file: one JSON object or an array of them.
    #[arg(long, env = "METASTAB_SCENARIO")]
    scenario: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, env = "METASTAB_OUT")]
    out: Option<PathBuf>,
    /// json, csv or table.
    #[arg(long, env = "METASTAB_FORMAT", default_value = "json")]
    format: Format,
    /// Search cap for scenarios that do not set their own.
    #[arg(long, env = "METASTAB_CAP")]
    cap: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "METASTAB_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// JSON document written by `run`.
    #[arg(long = "cert", alias = "scenario", env = "METASTAB_CERT")]
    cert: PathBuf,
    #[arg(long, env = "METASTAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    /// abel, tauber, gamma, monotone or specker.
    #[arg(long, env = "METASTAB_SUITE")]
    suite: Suite,
    /// Instances that must be accepted.
    #[arg(long, env = "METASTAB_COUNT", default_value_t = 200)]
    count: usize,
    #[arg(long, env = "METASTAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Give up after this many draws.
    #[arg(long, env = "METASTAB_MAX_DRAWS", default_value_t = 20_000)]
    max_draws: usize,
    /// Worker threads.
    #[arg(long, env = "METASTAB_JOBS")]
    jobs: Option<usize>,
    #[arg(long, env = "METASTAB_OUT")]
    out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::config(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn run(args: RunArgs) -> Result<Status, Error> {
    let path = args
        .scenario
        .ok_or_else(|| Error::config("no scenario file; pass --scenario <file>"))?;
    let scenarios = load_scenarios(&path)?;
    let reports = run_all(&scenarios, args.cap, args.jobs)?;
    let status = metastab_lab::runner::overall(reports.iter().map(|r| r.status));
    for r in &reports {
        if let Some(e) = &r.error {
            eprintln!("{e}");
        }
    }
    emit(&render(reports, args.format)?, args.out.as_deref())?;
    Ok(status)
}

fn verify(args: VerifyArgs) -> Result<Status, Error> {
    let text = std::fs::read_to_string(&args.cert)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", args.cert.display())))?;
    let summary = verify_document(&parse_document(&text)?)?;
    for r in &summary.reports {
        for p in &r.problems {
            eprintln!("report #{}: {p}", r.index);
        }
    }
    emit(&to_json(&summary)?, args.out.as_deref())?;
    Ok(summary.status())
}

fn fuzz(args: FuzzArgs) -> Result<Status, Error> {
    let job = || run_suite(args.suite, args.seed, args.count, args.max_draws);
    let summary = match args.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::config(format!("worker pool: {e}")))?
            .install(job),
        None => job(),
    };
    emit(&to_json(&summary)?, args.out.as_deref())?;
    Ok(if !summary.failures.is_empty() {
        Status::Fail
    } else if summary.accepted < summary.target {
        Status::Exhausted
    } else {
        Status::Pass
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                Status::ConfigError.exit_code()
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Some(Cmd::Run(a)) => run(a),
        Some(Cmd::VerifyCert(a)) => verify(a),
        Some(Cmd::Fuzz(a)) => fuzz(a),
        None => run(cli.run),
    };
    let status = match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("metastab: {e}");
            Status::ConfigError
        }
    };
    ExitCode::from(status.exit_code() as u8)
}
