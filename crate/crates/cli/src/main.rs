use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cachecalc::{
    compute, field_from_env, parse_grid, parse_schemes, render, sims_decoded, verify_report,
    Format, RunSpec, SimSpec,
};

/// Memory-load tradeoff tables for decentralized coded caching.
#[derive(Parser)]
#[command(version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Write the tradeoff table (the default).
    Run(RunArgs),
    /// Simulate every grid point and compare against the LP.
    Verify(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Number of users.
    #[arg(long = "K", default_value_t = 3)]
    users: usize,
    /// Number of files.
    #[arg(long = "N", default_value_t = 3)]
    files: usize,
    /// start:step:end or a comma list, e.g. 0:1/60:1 or 1/3,1/2.
    #[arg(long, default_value = "0:1/60:1", allow_hyphen_values = true)]
    gamma: String,
    /// Comma list from linp, uncoded, mds, yma, converse, table1.
    #[arg(long, default_value = "linp,uncoded,mds,converse")]
    schemes: String,
    /// Simulate the linear scheme at every grid point.
    #[arg(long)]
    sim: bool,
    #[arg(long = "B-min", default_value_t = 24)]
    b_min: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "tsv")]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self, force_sim: bool) -> Result<RunSpec> {
        let mut schemes = parse_schemes(&self.schemes)?;
        let sim = (self.sim || force_sim).then_some(SimSpec {
            b_min: self.b_min,
            trials: self.trials,
            seed: self.seed,
        });
        if force_sim && !schemes.contains(&cachecalc::Scheme::Linp) {
            schemes.insert(0, cachecalc::Scheme::Linp);
        }
        let spec = RunSpec {
            users: self.users,
            files: self.files,
            gamma_grid: parse_grid(&self.gamma)?,
            schemes,
            sim,
            format: self.format,
            field: field_from_env()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn run(args: &RunArgs) -> Result<bool> {
    let spec = args.spec(false)?;
    let rows = compute(&spec)?;
    args.emit(&render(&spec, &rows))?;
    let ok = sims_decoded(&rows);
    if !ok {
        eprintln!("error: some simulated trials failed to decode");
    }
    Ok(ok)
}

fn verify(args: &RunArgs) -> Result<bool> {
    let spec = args.spec(true)?;
    let rows = compute(&spec)?;
    let (report, ok) = verify_report(&rows);
    args.emit(&report)?;
    if !ok {
        eprintln!("error: measured loads or decoding disagree with the LP");
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        None => run(&cli.run),
        Some(Command::Run(a)) => run(a),
        Some(Command::Verify(a)) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
