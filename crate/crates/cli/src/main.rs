use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::{error, info};

use qtf_core::runner::{parse_config, run_single, run_sweep_with_stats, RunStatus, SweepManifest};
use qtf_core::verify;

/// Nematic liquid-crystal flow simulator (Q-tensor model, zero rotational coupling).
#[derive(Parser)]
#[command(name = "qtf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a JSON configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (the QTF_THREADS environment variable takes precedence).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run every point of a sweep manifest and write the results back into it.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// Number of runs executed concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Keep results already in the manifest and skip completed runs.
        #[arg(long)]
        resume: bool,
    },
    /// Run the algebraic and operator property suites.
    Verify,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("QTF_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("QTF_THREADS={v:?} is not a number"))?;
            Ok(Some(n))
        }
        Err(_) => Ok(flag),
    }
}

fn simulate(config: PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> Result<ExitCode> {
    if let Some(n) = thread_count(threads)? {
        if n == 0 {
            bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    info!("running {} steps into {}", cfg.steps(), cfg.output_dir.display());
    let summary = run_single(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}

fn sweep(path: PathBuf, parallel: usize, resume: bool) -> Result<ExitCode> {
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut manifest = SweepManifest::parse(&text)?;
    if !resume {
        manifest.results.clear();
    }
    let (done, stats) = run_sweep_with_stats(&manifest, parallel)?;
    fs::write(&path, serde_json::to_string_pretty(&done)?)?;
    let failed = done.results.iter().filter(|r| r.status == RunStatus::Failed).count();
    println!(
        "{} runs executed, {} skipped, {} failed",
        stats.executed, stats.skipped, failed
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run_verify() -> Result<ExitCode> {
    let mut ok = true;
    for c in verify::run_all()? {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:<40} {:>8} cases, worst/tol = {:.3e}", c.name, c.cases, c.worst);
        ok &= c.passed;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, threads } => simulate(config, out, threads),
        Command::Sweep {
            manifest,
            parallel,
            resume,
        } => sweep(manifest, parallel, resume),
        Command::Verify => run_verify(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
