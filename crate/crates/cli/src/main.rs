//! `tangle`: thermal three-tangle sweeps, optimal fields, power-law fits,
//! oracle validation and ground-state reports.
//!
//! Exit codes: 0 success, 1 invalid config or input, 2 validation failure,
//! 3 numerical error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use tangle_core::experiments::{
    fit_power_law, ground_state_report, read_columns, run_optimal_field, run_sweep, run_validation, write_csv,
};
use tangle_core::{Error, FieldKind, OptimizerOptions, SpinRingParams, SweepConfig};

#[derive(Parser)]
#[command(name = "tangle", version, about = "Three-tangle of a three-qubit Heisenberg ring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Output CSV (defaults to the config's `output`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the optimizer seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the number of optimizer restarts.
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Thermal tangle over a (ratio, T, b) grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        run: RunOpts,
    },
    /// b maximizing the thermal tangle, per (ratio, T).
    OptimalField {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Power-law fit y = c·x^k of two CSV columns in log-log coordinates.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "temperature")]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Checks the optimizer against closed-form oracle values.
    Validate {
        #[command(flatten)]
        run: RunOpts,
    },
    /// Spectrum, ground state, tangle and fidelities of one Hamiltonian.
    GroundState {
        /// Config supplying jxy, jz, field and a single b.
        #[arg(long, conflicts_with_all = ["jxy", "jz", "field", "b"])]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        jxy: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        jz: f64,
        /// radial, z or x
        #[arg(long, default_value = "radial")]
        field: String,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::NoConvergence(_) | Error::Numerical(_) | Error::NotHermitian(_) | Error::NotSkewHermitian(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

fn load_config(path: &Path, run: &RunOpts) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg: SweepConfig = text.parse().with_context(|| format!("parsing {}", path.display()))?;
    apply_overrides(&mut cfg.optimizer, run)?;
    Ok(cfg)
}

fn apply_overrides(opts: &mut OptimizerOptions, run: &RunOpts) -> Result<()> {
    if let Some(seed) = run.seed {
        opts.seed = seed;
    }
    if let Some(r) = run.restarts {
        opts.restarts = r;
    }
    opts.validate()?;
    Ok(())
}

fn init_workers(run: &RunOpts) -> Result<()> {
    if let Some(n) = run.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn out_path(run: &RunOpts, cfg: &SweepConfig) -> Option<PathBuf> {
    run.out.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sweep { config, run } => {
            let cfg = load_config(&config, &run)?;
            init_workers(&run)?;
            let rows = run_sweep(&cfg, output(out_path(&run, &cfg).as_deref())?)?;
            let unconverged = rows.iter().filter(|r| !r.converged).count();
            if unconverged > 0 {
                eprintln!("warning: {unconverged} of {} points did not converge", rows.len());
            }
            Ok(0)
        }
        Command::OptimalField { config, run } => {
            let cfg = load_config(&config, &run)?;
            init_workers(&run)?;
            run_optimal_field(&cfg, output(out_path(&run, &cfg).as_deref())?)?;
            Ok(0)
        }
        Command::Fit { input, x, y } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let (xs, ys) = read_columns(&text, &x, &y)?;
            let fit = fit_power_law(&xs, &ys)?;
            println!("{fit}");
            Ok(0)
        }
        Command::Validate { run } => {
            let mut opts = OptimizerOptions::default();
            apply_overrides(&mut opts, &run)?;
            init_workers(&run)?;
            let report = run_validation(&opts)?;
            if let Some(p) = &run.out {
                write_csv(output(Some(p))?, &report.rows)?;
            }
            println!("{report}");
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::GroundState { config, jxy, jz, field, b } => {
            let params = match config {
                Some(path) => {
                    let cfg = load_config(&path, &RunOpts { out: None, seed: None, workers: None, restarts: None })?;
                    if cfg.b_grid.len() != 1 {
                        return Err(Error::Config("ground-state needs a single b value".into()).into());
                    }
                    cfg.model.with_b(cfg.b_grid[0])
                }
                None => SpinRingParams { jxy, jz, field: field.parse::<FieldKind>()?, b, temperature: 0.0 },
            };
            println!("{}", ground_state_report(&params)?);
            Ok(0)
        }
    }
}
