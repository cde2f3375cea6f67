//! `anisotm`: config-driven runner for the anisotropic Trudinger-Moser
//! laboratory. Exit codes: 0 success, 1 invariant violation, 2 config
//! error, 3 numerical non-convergence.

mod config;
mod run;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use anisotm_core::error::Error;
use anisotm_core::io::write_sweep_csv;

use config::{CommandKind, ExperimentConfig};
use run::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "anisotm", about = "Anisotropic Trudinger-Moser experiment runner")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out`, defaults to ".".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweep points.
    #[arg(long)]
    jobs: Option<usize>,
    /// Tabular output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::Infeasible(_)
        | Error::DimensionMismatch { .. }
        | Error::GridMismatch(_)
        | Error::EmptyGrid
        | Error::Io(_) => 2,
        Error::NonConvergence { .. } | Error::QuadratureBudget { .. } => 3,
        Error::ConstraintViolated(_) | Error::HypothesesViolated(_) | Error::DegenerateInput(_) => 1,
    }
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // Round-trip invariant: the emitted form parses back to itself.
    let reparsed = ExperimentConfig::from_json(&cfg.to_json())?;
    if reparsed != cfg {
        return Err(Error::Parse("config does not round-trip".into()));
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }

    let g = cfg.gauge.build()?;
    let params = cfg.params.build(&g)?;

    let report: Report = match cfg.command {
        CommandKind::Verify => run::run_verify(&cfg, &g, &params)?,
        CommandKind::Sweep => run::run_sweep(&cfg, &g, &params)?,
        CommandKind::Sup => run::run_sup(&cfg, &g, &params)?,
        CommandKind::Mu => run::run_mu(&cfg, &params)?,
        CommandKind::Symcheck => run::run_symcheck(&cfg, &g, &params)?,
    };

    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let name = cfg.command.name();

    let mut summary = serde_json::to_string_pretty(&serde_json::json!({
        "command": name,
        "seed": cfg.seed,
        "summary": report.summary,
    }))
    .expect("summary serializes");
    summary.push('\n');
    std::fs::write(out_dir.join(format!("{name}_summary.json")), summary)?;

    if !report.rows.is_empty() {
        match cli.format {
            Format::Csv => {
                write_sweep_csv(&report.rows, &out_dir.join(format!("{name}_rows.csv")))?
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&report.rows).expect("rows serialize");
                s.push('\n');
                std::fs::write(out_dir.join(format!("{name}_rows.json")), s)?;
            }
        }
    }

    if report.violations > 0 {
        return Ok(1);
    }
    if report.nonconverged {
        return Ok(3);
    }
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}
