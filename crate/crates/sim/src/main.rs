//! `dmt-sim`: Monte Carlo outage sweeps, DMT surface tabulation, and property
//! verification for the interference-limited MIMO uplink with a linear MMSE
//! receiver.
//!
//! Exit codes: 0 success, 1 property failure, 2 config error, 3 run invalid.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmt_core::analysis::{self, AnalysisError};
use dmt_sim::config::ConfigFile;
use dmt_sim::verify::{self, Status};
use dmt_sim::{output, runner, CliError};

#[derive(Parser)]
#[command(
    name = "dmt-sim",
    version,
    about = "Monte Carlo DMT simulator for the cellular MIMO uplink with a linear MMSE receiver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an outage sweep over the configured SNR grid and fit the
    /// empirical diversity slope.
    Sweep(RunArgs),
    /// Tabulate the closed-form tradeoff d*(r, xi) over an (r, xi) grid.
    DmtSurface(RunArgs),
    /// Run the per-realization property suite and report pass/fail per
    /// property.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (sectioned key = value text).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result files.
    #[arg(long = "out", default_value = ".")]
    out: PathBuf,
    /// Override a config value, e.g. --set system.interferers=6.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; output is identical for any value.
    #[arg(long)]
    workers: Option<usize>,
    /// Shorthand for --set rng.seed=SEED, applied last.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load_config(&self) -> Result<ConfigFile, CliError> {
        let mut cfg = ConfigFile::load(&self.config)?;
        for spec in &self.set {
            cfg.apply_override(spec)?;
        }
        if let Some(seed) = self.seed {
            cfg.apply_override(&format!("rng.seed={seed}"))?;
        }
        Ok(cfg)
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn run_sweep(args: &RunArgs) -> Result<(), CliError> {
    let run = args.load_config()?.resolve_sweep()?;
    let curve = runner::sweep_parallel(&run.system, args.workers(), true)
        .map_err(|e| CliError::RunInvalid(e.to_string()))?;
    let fit = analysis::estimate_slope(&curve, run.fit_window);
    if let Err(AnalysisError::InsufficientPoints { found }) = &fit {
        let _ = writeln!(
            std::io::stderr(),
            "warning: slope fit skipped, only {found} points qualified inside the outage window"
        );
    }
    write_file(
        &args.out,
        "outage.csv",
        &output::outage_csv(&run.echo, &curve),
    )?;
    write_file(
        &args.out,
        "summary.txt",
        &output::summary_txt(&run.echo, &curve, &fit),
    )?;
    if let Ok(est) = &fit {
        println!(
            "d_hat = {:.4} +/- {:.4} over {} points (theory {:.4})",
            est.slope, est.stderr, est.points_used, est.theoretical_d
        );
    }
    println!("wrote {}", args.out.join("outage.csv").display());
    Ok(())
}

fn run_dmt_surface(args: &RunArgs) -> Result<(), CliError> {
    let run = args.load_config()?.resolve_surface()?;
    let mut rows = Vec::with_capacity(run.r_grid.len() * run.xi_grid.len());
    for &r in &run.r_grid {
        for &xi in &run.xi_grid {
            rows.push((
                r,
                xi,
                analysis::dmt_theoretical(run.m, run.n, r, xi),
                analysis::dmt_p2p(run.m, run.n, r),
                analysis::ml_dmt_interpolated(run.m, run.n, r),
            ));
        }
    }
    write_file(
        &args.out,
        "dmt_surface.csv",
        &output::surface_csv(&run.echo, &rows),
    )?;
    println!(
        "wrote {} ({} rows)",
        args.out.join("dmt_surface.csv").display(),
        rows.len()
    );
    Ok(())
}

fn run_verify(args: &RunArgs) -> Result<bool, CliError> {
    let run = args.load_config()?.resolve_verify()?;
    for (key, value) in &run.echo {
        println!("# {key} = {value}");
    }
    let results = verify::run_all(&run.system, &run.params);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut passed = 0;
    let mut failed = 0;
    let mut skipped = 0;
    for r in &results {
        let status = match r.status {
            Status::Pass => {
                passed += 1;
                "PASS"
            }
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => {
                skipped += 1;
                "SKIP"
            }
        };
        println!("{:<width$}  {status}  {}", r.name, r.detail, width = width);
    }
    println!(
        "RESULT: {} ({passed} passed, {failed} failed, {skipped} skipped)",
        if failed == 0 { "PASS" } else { "FAIL" }
    );
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => run_sweep(args).map(|()| true),
        Command::DmtSurface(args) => run_dmt_surface(args).map(|()| true),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
