//! `corridor-opt`: optimize cellular antenna tilts, transmit powers, and
//! cell partitions for ground users and UAV corridors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corridor_opt::commands::{
    self, Emit, EvaluateOptions, GradCheckOptions, OptimizeOptions, VerifyPartitionOptions,
};
use corridor_opt::CliError;
use corridor_opt_core::optimizer::Algorithm;

#[derive(Parser)]
#[command(
    name = "corridor-opt",
    about = "Optimize cellular antenna tilts, powers, and cell partitions for ground users and UAV corridors",
    version
)]
struct Cli {
    /// Worker threads for objective evaluation (0 = auto). Overrides the
    /// CORRIDOR_OPT_THREADS environment variable.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EmitArg {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimization algorithm on a scenario and export the result.
    Optimize {
        /// Scenario file (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Algorithm override (defaults to the scenario's).
        #[arg(long)]
        algo: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Seed override for labels and initialization.
        #[arg(long)]
        seed: Option<u64>,
        /// Run this many seeds (seed, seed+1, ...) and keep the best.
        #[arg(long, default_value_t = 1)]
        restarts: u32,
        /// Stream per-iteration trace records to stderr as JSON lines.
        #[arg(long)]
        stream_trace: bool,
        #[command(flatten)]
        emit: EmitArg,
    },
    /// Evaluate a fixed tilt/power configuration on a scenario.
    Evaluate {
        #[arg(long)]
        scenario: PathBuf,
        /// Tilts CSV (`bs_id,tilt_deg`), as written by `optimize`.
        #[arg(long)]
        tilts: PathBuf,
        /// Powers CSV (`bs_id,power_dbm`), as written by `optimize`.
        #[arg(long)]
        powers: PathBuf,
        /// Optional output directory for the full file set.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        emit: EmitArg,
    },
    /// Compare all seven analytic gradients against finite differences at
    /// random states of the scenario. Exit 0 only if every component passes.
    GradCheck {
        #[arg(long)]
        scenario: PathBuf,
        /// Number of random states.
        #[arg(long, default_value_t = 20)]
        trials: u32,
        /// Relative tolerance.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// Central-difference step (degrees / dB).
        #[arg(long, default_value_t = 1e-4)]
        fd_step: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify that the best-RSS partition passes the single-point exchange
    /// test under all four objectives.
    VerifyPartition {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        tilts: Option<PathBuf>,
        #[arg(long)]
        powers: Option<PathBuf>,
    },
}

fn threads_from_env() -> Option<usize> {
    let raw = std::env::var("CORRIDOR_OPT_THREADS").ok()?;
    raw.trim().parse::<usize>().ok()
}

fn configure_threads(flag: Option<usize>) {
    // 0 means auto; rayon interprets 0 the same way.
    let threads = flag.or_else(threads_from_env).unwrap_or(0);
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}

fn parse_algo(algo: Option<String>) -> Result<Option<Algorithm>, CliError> {
    match algo {
        None => Ok(None),
        Some(name) => name
            .parse::<Algorithm>()
            .map(Some)
            .map_err(|e| CliError::Validation(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.threads);
    match cli.command {
        Command::Optimize {
            scenario,
            algo,
            out,
            seed,
            restarts,
            stream_trace,
            emit,
        } => {
            let report = commands::optimize(&OptimizeOptions {
                scenario,
                algo: parse_algo(algo)?,
                out_dir: out,
                seed,
                restarts,
                emit: emit.emit,
                stream_trace,
            })?;
            println!(
                "{} seed {} finished after {} outer iterations ({}): objective {}",
                report.algorithm,
                report.seed,
                report.outer_iterations,
                report.termination,
                report.final_objective
            );
            if let (Some(ground), Some(uav)) = (report.mean_rss_dbm.ground, report.mean_rss_dbm.uav)
            {
                println!("mean RSS  dBm: ground {ground:.3}, uav {uav:.3}");
            }
            if let (Some(ground), Some(uav)) = (report.mean_sinr_db.ground, report.mean_sinr_db.uav)
            {
                println!("mean SINR dB : ground {ground:.3}, uav {uav:.3}");
            }
            Ok(())
        }
        Command::Evaluate {
            scenario,
            tilts,
            powers,
            out,
            emit,
        } => {
            let report = commands::evaluate(&EvaluateOptions {
                scenario,
                tilts,
                powers,
                out_dir: out,
                emit: emit.emit,
            })?;
            println!("objective {}", report.final_objective);
            println!(
                "mean RSS dBm: ground {:?}, uav {:?}; mean SINR dB: ground {:?}, uav {:?}",
                report.mean_rss_dbm.ground,
                report.mean_rss_dbm.uav,
                report.mean_sinr_db.ground,
                report.mean_sinr_db.uav
            );
            Ok(())
        }
        Command::GradCheck {
            scenario,
            trials,
            tol,
            fd_step,
            seed,
        } => {
            let summary = commands::grad_check(&GradCheckOptions {
                scenario,
                trials,
                tolerance: tol,
                fd_step,
                seed,
            })?;
            println!(
                "grad-check: {} components over {} trials, worst scaled error {:.3e}",
                summary.components_checked, summary.trials, summary.worst_scaled_error
            );
            if summary.passed() {
                println!("grad-check: PASS");
                Ok(())
            } else {
                for failure in summary.failures.iter().take(10) {
                    eprintln!(
                        "FAIL trial {} {:?}/{:?} component {}: analytic {:.9e} vs numeric {:.9e}",
                        failure.trial,
                        failure.kind,
                        failure.block,
                        failure.component,
                        failure.analytic,
                        failure.numeric
                    );
                }
                Err(CliError::GradCheck(format!(
                    "{} of {} gradient components disagree with finite differences",
                    summary.failures.len(),
                    summary.components_checked
                )))
            }
        }
        Command::VerifyPartition {
            scenario,
            tilts,
            powers,
        } => {
            let results = commands::verify_partition(&VerifyPartitionOptions {
                scenario,
                tilts,
                powers,
            })?;
            let mut all_ok = true;
            for (name, ok) in &results {
                println!("{name}: {}", if *ok { "optimal" } else { "suboptimal" });
                all_ok &= ok;
            }
            if all_ok {
                Ok(())
            } else {
                Err(CliError::numerical(
                    "best-RSS partition failed the exchange test",
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    // Keep the exit-code contract: flag errors are validation errors (1).
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output goes to stdout with success.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
