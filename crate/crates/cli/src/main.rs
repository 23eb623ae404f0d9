#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use gauss_ts_cli::config::ExperimentSpec;
use gauss_ts_cli::runner::{load_spec, run_experiment, RunOutput};
use gauss_ts_cli::separation::{
    render_summary, render_summary_csv, run_separation, SeparationConfig,
};
use gauss_ts_cli::verify::{run_suites, Suite, SuiteReport, VerifyOptions};
use gauss_ts_cli::{HarnessError, Result};

/// Thompson sampling experiments for Gaussian bandits with unknown means and
/// variances.
#[derive(Debug, Parser)]
#[command(name = "gauss-ts", version, about)]
struct Cli {
    /// Worker threads for replicated runs (default: all available cores).
    /// Results are independent of this value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory. Defaults to $GAUSS_TS_OUT, then the current
    /// directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment from a TOML spec file (or re-run the spec embedded
    /// in a JSON manifest).
    Run {
        /// Path to the spec (.toml) or manifest (.json).
        spec: PathBuf,
    },
    /// Run a verification suite and print its pass/fail margin table.
    /// Exits with code 3 if any inequality fails.
    Verify {
        /// One of: lemma1, lemma2, lemma3, posterior, all.
        suite: String,
        /// Seed for the randomized suites.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Monte Carlo trials per cell in the lemma2 suite.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Debug: divide the stated bounds by this factor to force failures
        /// (negative control of the harness).
        #[arg(long, default_value_t = 1.0)]
        debug_divide_bound: f64,
    },
    /// Run the known-arm separation experiment for several prior exponents
    /// and print fitted growth exponents.
    Separation {
        /// Comma-separated prior exponents, e.g. -0.5,0,0.5.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
        #[arg(long, default_value_t = 2000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Known mean of arm 2.
        #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
        mu2: f64,
        /// True variance of arm 2.
        #[arg(long = "sigma2-2", default_value_t = 1.0)]
        sigma2_2: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os("GAUSS_TS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(HarnessError::config("--jobs must be >= 1"));
    }

    match cli.command {
        Command::Run { spec } => {
            let spec: ExperimentSpec = load_spec(&spec)?;
            let output = run_experiment(&spec, &out_dir, jobs)?;
            print_run_summary(&output);
            Ok(())
        }
        Command::Verify {
            suite,
            seed,
            trials,
            debug_divide_bound,
        } => {
            let suite: Suite = suite.parse().map_err(HarnessError::Config)?;
            if trials == 0 {
                return Err(HarnessError::config("--trials must be >= 1"));
            }
            if !(debug_divide_bound > 0.0) {
                return Err(HarnessError::config("--debug-divide-bound must be > 0"));
            }
            let opts = VerifyOptions {
                seed,
                trials,
                divide_bound: debug_divide_bound,
            };
            let reports = run_suites(suite, &opts);
            for report in &reports {
                print_suite_table(report);
            }
            for report in reports {
                report.into_result()?;
            }
            Ok(())
        }
        Command::Separation {
            alphas,
            horizon,
            reps,
            seed,
            mu2,
            sigma2_2,
        } => {
            let cfg = SeparationConfig {
                alphas,
                horizon,
                reps,
                seed,
                mu2,
                sigma2_2,
            };
            let report = run_separation(&cfg, &out_dir, jobs)?;
            for r in &report.results {
                println!(
                    "alpha={}: wrote {} ({} reps, {:.1}s)",
                    r.alpha,
                    r.run.csv_path.display(),
                    r.run.spec.reps,
                    r.run.wall_time_secs
                );
            }
            println!();
            print!("{}", render_summary(&report));
            let summary_path = out_dir.join("separation_summary.csv");
            std::fs::write(&summary_path, render_summary_csv(&report)).map_err(|e| {
                HarnessError::runtime(format!("cannot write {}: {e}", summary_path.display()))
            })?;
            println!("\nsummary written to {}", summary_path.display());
            Ok(())
        }
    }
}

fn print_run_summary(output: &RunOutput) {
    let agg = &output.aggregate;
    let last = agg.checkpoints.len() - 1;
    let t = agg.checkpoints[last];
    println!(
        "{}: {} reps, horizon {}, wall time {:.1}s",
        output.spec.name, output.spec.reps, output.spec.horizon, output.wall_time_secs
    );
    println!(
        "final mean regret {:.4} +- {:.4} (regret/ln T = {:.4})",
        agg.mean_regret[last],
        agg.stderr[last],
        agg.mean_regret[last] / (t as f64).ln()
    );
    if let Some(c) = output.lower_bound_coefficient {
        println!("lower-bound coefficient {c:.4}");
    }
    println!(
        "wrote {}, {}, {}",
        output.csv_path.display(),
        output.finals_path.display(),
        output.manifest_path.display()
    );
}

fn print_suite_table(report: &SuiteReport) {
    const SHOWN: usize = 36;
    println!(
        "{:<10} {:<44} {:>13} {:>13} {:>11} {:>6}",
        "suite", "check", "observed", "required", "margin", "status"
    );
    let mut shown = 0;
    for check in &report.checks {
        // Small suites print in full; large grids print failures plus the
        // tightest passing margins.
        let print_all = report.checks.len() <= SHOWN;
        if print_all || !check.pass {
            print_check_row(check);
            shown += 1;
        }
    }
    if report.checks.len() > SHOWN {
        let mut by_margin: Vec<&gauss_ts_cli::verify::Check> = report.checks.iter().collect();
        by_margin.sort_by(|a, b| a.margin.partial_cmp(&b.margin).expect("NaN margin"));
        for check in by_margin.iter().take(5) {
            if check.pass {
                print_check_row(check);
                shown += 1;
            }
        }
    }
    if shown < report.checks.len() {
        println!("  ... ({} checks not shown)", report.checks.len() - shown);
    }
    let failures = report.failures().count();
    println!(
        "suite {}: {} checks, {} failed{}",
        report.suite,
        report.checks.len(),
        failures,
        report
            .worst()
            .map(|w| format!(", worst margin {:+.3e} at {}", w.margin, w.label))
            .unwrap_or_default()
    );
    println!();
}

fn print_check_row(check: &gauss_ts_cli::verify::Check) {
    println!(
        "{:<10} {:<44} {:>13.6e} {:>13.6e} {:>11.3e} {:>6}",
        check.suite,
        check.label,
        check.observed,
        check.requirement,
        check.margin,
        if check.pass { "pass" } else { "FAIL" }
    );
}
