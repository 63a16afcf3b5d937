//! Command-line front end: configuration, command execution and reports.

pub mod config;
pub mod report;
pub mod run;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::json;

use crate::error::{Result, ToolkitError};
use config::RunConfig;
use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Norms,
    KernelGram,
    Carleson,
    Separation,
    Pick,
    Drury,
    Extend,
    Glue,
    Weighted,
    Automorphism,
    TypeExp,
    Appendix,
    AllChecks,
}

impl Command {
    /// Every command except the aggregate one, in execution order.
    pub const EXPERIMENTS: [Command; 12] = [
        Command::Norms,
        Command::KernelGram,
        Command::Carleson,
        Command::Separation,
        Command::Pick,
        Command::Drury,
        Command::Extend,
        Command::Glue,
        Command::Weighted,
        Command::Automorphism,
        Command::TypeExp,
        Command::Appendix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::KernelGram => "kernel-gram",
            Command::Carleson => "carleson",
            Command::Separation => "separation",
            Command::Pick => "pick",
            Command::Drury => "drury",
            Command::Extend => "extend",
            Command::Glue => "glue",
            Command::Weighted => "weighted",
            Command::Automorphism => "automorphism",
            Command::TypeExp => "type-exp",
            Command::Appendix => "appendix",
            Command::AllChecks => "all-checks",
        }
    }
}

/// Numerical experiments on Hardy-Sobolev spaces of the unit ball.
#[derive(Debug, Parser)]
#[command(name = "hsball", version)]
pub struct Args {
    pub command: Command,
    /// JSON run configuration (optional for `appendix`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, or `-` for the JSON report on stdout.
    #[arg(long, default_value = "./out")]
    pub out: String,
    /// Overrides the configured seed and quadrature seed.
    #[arg(long, env = "HSBALL_SEED")]
    pub seed: Option<u64>,
    /// Treat truncation at the degree cap as an error.
    #[arg(long)]
    pub strict: bool,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Largest derivative order in the appendix tables.
    #[arg(long)]
    pub jmax: Option<u32>,
    /// Largest power in the appendix tables.
    #[arg(long)]
    pub lmax: Option<u32>,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

/// The configuration a run actually uses, with command-line overrides applied.
pub fn effective_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None if args.command == Command::Appendix => RunConfig::bare(1, 0.0, 2.0),
        None => return Err(ToolkitError::invalid("--config is required for this command")),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        cfg.quadrature.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.quadrature.samples = samples;
    }
    if let Some(j) = args.jmax {
        cfg.options.jmax = j;
    }
    if let Some(l) = args.lmax {
        cfg.options.lmax = l;
    }
    cfg.strict |= args.strict;
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(dir: &Path, command: Command, report: &Report, csv: &[(String, String)]) -> Result<()> {
    let io = |e: std::io::Error| ToolkitError::invalid(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{}.json", command.name())), report.to_json() + "\n").map_err(io)?;
    for (name, contents) in csv {
        std::fs::write(dir.join(name), contents).map_err(io)?;
    }
    Ok(())
}

fn execute(args: &Args) -> Result<bool> {
    let cfg = effective_config(args)?;
    let outcome = run::run(args.command, &cfg)?;
    let report = Report::new(args.command.name(), cfg, &outcome);
    if args.out == "-" {
        let mut stdout = std::io::stdout().lock();
        match writeln!(stdout, "{}", report.to_json()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                return Err(ToolkitError::invalid(format!("cannot write to stdout: {e}")));
            }
            _ => {}
        }
    } else {
        write_outputs(Path::new(&args.out), args.command, &report, &outcome.csv)?;
    }
    Ok(report.passed)
}

/// Run the CLI and return the process exit code.
pub fn main_with(args: &Args) -> i32 {
    match execute(args) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_ASSERTION,
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind, "message": e.message } });
            eprintln!("{body}");
            EXIT_ERROR
        }
    }
}

