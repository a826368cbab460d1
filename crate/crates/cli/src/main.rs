use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cnlse_cli::output::{fmt_num, DEFAULT_PRECISION};
use cnlse_cli::{cmd_compare, cmd_run, cmd_stability, exit, CliError, OutputPlan, RunRequest, Source};
use cnlse_core::analysis::DEFAULT_RHO_TAU_THRESHOLD;
use cnlse_core::Scheme;

/// Finite-difference solver for the coupled nonlinear Schrödinger equations.
#[derive(Debug, Parser)]
#[command(name = "cnlse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Built-in scenario name.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Scenario file in key = value format.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

impl SourceArgs {
    fn source(self) -> Source {
        match (self.preset, self.config) {
            (Some(name), _) => Source::Preset(name),
            (None, Some(path)) => Source::Config(path),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario and write time series, snapshots and a summary.
    ///
    /// Sweep presets write one subdirectory per run. Existing snapshot
    /// files in the output directory are replaced.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Output directory [default: cnlse-out/<preset or config name>].
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Time step; the final time is kept.
        #[arg(long, value_name = "X")]
        tau: Option<f64>,
        /// Number of time steps to take.
        #[arg(long, value_name = "N")]
        steps: Option<u64>,
        /// Significant digits in output files (6 to 17).
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: usize,
        /// Observations between snapshots [default: 50 snapshots per run].
        #[arg(long, value_name = "M")]
        snapshot_every: Option<u64>,
    },
    /// Print the stability budget of a scenario as key=value lines.
    Stability {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_name = "X", default_value_t = DEFAULT_RHO_TAU_THRESHOLD)]
        threshold: f64,
    },
    /// Compare |U| and |V| of two run directories at common snapshot times.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            source,
            scheme,
            out,
            tau,
            steps,
            precision,
            snapshot_every,
        } => {
            let source = source.source();
            let directory = out.unwrap_or_else(|| {
                let name = match &source {
                    Source::Preset(name) => name.clone(),
                    Source::Config(path) => path
                        .file_stem()
                        .map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned()),
                };
                PathBuf::from("cnlse-out").join(name)
            });
            let request = RunRequest {
                source,
                scheme,
                tau,
                steps,
                plan: OutputPlan {
                    directory,
                    snapshot_every,
                    precision,
                },
            };
            let report = match cmd_run(&request) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            for (label, w) in &report.warnings {
                eprintln!("warning [{label}]: {w}");
            }
            for o in &report.outcomes {
                println!(
                    "{}: {} (rho_tau={}, wall_time={:.3}s) -> {}",
                    o.label,
                    o.record.termination,
                    fmt_num(o.budget.rho_tau, 4),
                    o.record.wall_time.as_secs_f64(),
                    o.directory.display()
                );
                if let Some(step) = o.record.termination.failing_step() {
                    eprintln!("{}: {} (failing step {step})", o.label, o.record.termination);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Stability { source, threshold } => match cmd_stability(&source.source(), threshold) {
            Ok(reports) => {
                let many = reports.len() > 1;
                for (label, pairs) in reports {
                    if many {
                        println!("# {label}");
                    }
                    for (k, v) in pairs {
                        println!("{k}={v}");
                    }
                }
                ExitCode::from(exit::OK as u8)
            }
            Err(e) => fail(e),
        },
        Command::Compare { dir_a, dir_b } => match cmd_compare(&dir_a, &dir_b) {
            Ok(report) => {
                for r in &report.rows {
                    println!(
                        "t={} l2_u={} max_u={} l2_v={} max_v={}",
                        fmt_num(r.time, 9),
                        fmt_num(r.l2_u, 6),
                        fmt_num(r.max_u, 6),
                        fmt_num(r.l2_v, 6),
                        fmt_num(r.max_v, 6)
                    );
                }
                println!("common_times={}", report.rows.len());
                println!("max_difference={}", fmt_num(report.max_difference, 6));
                ExitCode::from(exit::OK as u8)
            }
            Err(e) => fail(e),
        },
    }
}
