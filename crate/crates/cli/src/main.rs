use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use klslab::harness::{
    parse_body, parse_profile, run, write_outputs, ExperimentConfig, ExperimentKind, Verdict, BODY_CATALOG,
    PROFILE_CATALOG,
};
use klslab::Error;

/// Monte Carlo verification suites for B-symmetric log-concave measures.
#[derive(Parser)]
#[command(name = "klslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config or from flags.
    Run(RunArgs),
    /// List body descriptors.
    ListBodies,
    /// List profile descriptors.
    ListProfiles,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// Body descriptor, repeatable (e.g. lp:2, lp:inf:2, simplex, cone).
    #[arg(long = "body")]
    bodies: Vec<String>,
    /// Profile descriptor, repeatable (e.g. uniform:1, exp:1, gauss:1, powexp:3:1).
    #[arg(long = "profile")]
    profiles: Vec<String>,
    /// Dimension, repeatable or comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: the config's output_path, else ./report).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| Error::Descriptor(e.to_string()))?
        }
        None => {
            let exp = args
                .experiment
                .as_deref()
                .ok_or_else(|| Error::Descriptor("either --config or --experiment is required".into()))?;
            let count = args.count.ok_or_else(|| Error::Descriptor("--count is required".into()))?;
            let seed = args.seed.ok_or_else(|| Error::Descriptor("--seed is required".into()))?;
            ExperimentConfig::new(ExperimentKind::parse(exp)?, count, seed)
        }
    };
    if let Some(exp) = &args.experiment {
        cfg.experiment = ExperimentKind::parse(exp)?;
    }
    if !args.bodies.is_empty() {
        cfg.bodies = args.bodies.iter().map(|b| parse_body(b)).collect::<Result<_, _>>()?;
    }
    if !args.profiles.is_empty() {
        cfg.profiles = args.profiles.iter().map(|p| parse_profile(p)).collect::<Result<_, _>>()?;
    }
    if !args.dims.is_empty() {
        cfg.dims = args.dims.clone();
    }
    if let Some(c) = args.count {
        cfg.count = c;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_command(args: &RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("klslab: config error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("klslab: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = PathBuf::from(cfg.output_path.as_deref().unwrap_or("report"));
    if let Err(e) = write_outputs(&report, &dir) {
        eprintln!("klslab: cannot write {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    for r in report.failures() {
        println!(
            "FAIL {} {} n={} {}: value {} se {} threshold {}",
            r.body,
            r.profile,
            r.n,
            r.quantity,
            r.value,
            r.se.map_or("-".into(), |v| v.to_string()),
            r.threshold.map_or("-".into(), |v| v.to_string()),
        );
    }
    let gated = report.rows.iter().filter(|r| r.verdict != Verdict::Info).count();
    let failed = report.failures().count();
    println!(
        "{}: {} rows, {} gated, {} failed, {:.1}s, {} worker(s); wrote {}",
        report.experiment,
        report.rows.len(),
        gated,
        failed,
        report.metadata.wall_time_s,
        report.metadata.workers,
        dir.display()
    );
    if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(&args),
        Command::ListBodies => {
            for (form, what) in BODY_CATALOG {
                println!("{form:<32} {what}");
            }
            ExitCode::SUCCESS
        }
        Command::ListProfiles => {
            for (form, what) in PROFILE_CATALOG {
                println!("{form:<32} {what}");
            }
            ExitCode::SUCCESS
        }
    }
}
