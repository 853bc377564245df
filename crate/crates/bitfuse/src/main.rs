use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bitfuse::cli::{
    cmd_event_rate, cmd_highdim_compare, cmd_privacy_bound, cmd_simulate, cmd_tradeoff,
    cmd_validate, EventRateOpts, FormChoice, HighdimOpts, PrivacyBoundOpts, SimulateOpts,
    TradeoffOpts,
};

/// Distributed estimation over lossy switching networks with one-bit
/// dithered communication and Fisher-information privacy accounting.
#[derive(Parser)]
#[command(name = "bitfuse", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    General,
    Rate,
}

#[derive(Subcommand)]
enum Command {
    /// Check every standing assumption of a configuration.
    Validate { config: PathBuf },
    /// Monte Carlo the squared-error trajectory; writes metrics.csv.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Disable all links: the innovation-only baseline.
        #[arg(long)]
        no_communication: bool,
    },
    /// Evaluate one sensor's leakage bound; writes privacy.csv.
    PrivacyBound {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        sensor: usize,
        #[arg(long, default_value_t = 100_000)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = FormArg::Rate)]
        form: FormArg,
        #[arg(long, default_value_t = 60)]
        points: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Edge probabilities from the exact distribution recursion
        /// instead of the stationary constants (general form only).
        #[arg(long)]
        recursion_q: bool,
    },
    /// Sweep privacy/convergence targets; writes tradeoff.csv.
    Tradeoff {
        config: PathBuf,
        #[arg(long, default_value_t = 0.96)]
        nu: f64,
        /// Comma-separated leakage decay targets, each in [1, 2 nu).
        #[arg(long = "chi-list", value_delimiter = ',', required = true)]
        chi_list: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Paired one-bit vs per-coordinate comparison; writes highdim.csv.
    HighdimCompare {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Synthetic binary event-rate study; writes metrics.csv.
    EventRate {
        #[arg(long, default_value_t = 0.2699)]
        theta: f64,
        #[arg(long, default_value_t = 0.7)]
        participation: f64,
        #[arg(long, default_value_t = 20)]
        sensors: usize,
        #[arg(long, default_value_t = 1.3)]
        chi: f64,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run(args: Args) -> Result<ExitCode, bitfuse::Error> {
    match args.command {
        Command::Validate { config } => {
            let report = cmd_validate(&config)?;
            print!("{report}");
            if report.all_passed() {
                println!("all assumptions hold");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("assumption violations found");
                Ok(ExitCode::from(1))
            }
        }
        Command::Simulate {
            config,
            repeats,
            horizon,
            seed,
            out,
            jobs,
            no_communication,
        } => {
            let outcome = cmd_simulate(&SimulateOpts {
                config,
                repeats,
                horizon,
                seed,
                out,
                jobs,
                no_communication,
            })?;
            println!(
                "seed {}: mean squared error {} at k = {horizon}; wrote {}",
                outcome.seed,
                outcome.final_mean_sq_error,
                outcome.metrics_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::PrivacyBound {
            config,
            sensor,
            kmax,
            form,
            points,
            out,
            recursion_q,
        } => {
            let outcome = cmd_privacy_bound(&PrivacyBoundOpts {
                config,
                sensor,
                kmax,
                form: match form {
                    FormArg::General => FormChoice::General,
                    FormArg::Rate => FormChoice::Rate,
                },
                points,
                out,
                recursion_q,
            })?;
            match outcome.summary.slope {
                Some(s) => println!(
                    "sensor {} {} bound: fitted slope {:.4} (+-{:.4}); wrote {}",
                    outcome.summary.sensor,
                    outcome.summary.form,
                    s,
                    outcome.summary.slope_halfwidth.unwrap_or(0.0),
                    outcome.csv_path.display()
                ),
                None => println!(
                    "sensor {} {} bound is identically zero; wrote {}",
                    outcome.summary.sensor,
                    outcome.summary.form,
                    outcome.csv_path.display()
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tradeoff {
            config,
            nu,
            chi_list,
            repeats,
            horizon,
            seed,
            out,
            jobs,
        } => {
            let outcome = cmd_tradeoff(&TradeoffOpts {
                config,
                nu,
                chi_list,
                repeats,
                horizon,
                seed,
                out,
                jobs,
            })?;
            for row in &outcome.report.rows {
                println!(
                    "chi {}: bound slope {:.4}, error slope {:.4}",
                    row.chi, row.bound_slope, row.mse_slope
                );
            }
            println!(
                "verdict: {}; wrote {}",
                outcome.report.verdict.name(),
                outcome.csv_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::HighdimCompare {
            config,
            repeats,
            horizon,
            seed,
            out,
            jobs,
        } => {
            let outcome = cmd_highdim_compare(&HighdimOpts {
                config,
                repeats,
                horizon,
                seed,
                out,
                jobs,
            })?;
            let r = &outcome.report;
            println!(
                "k = {}: one-bit {} vs per-coordinate {} (bits {} vs {}); wrote {}",
                r.probe_k,
                r.one_bit_mse,
                r.multi_bit_mse,
                r.one_bit_total_bits,
                r.multi_bit_total_bits,
                outcome.csv_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::EventRate {
            theta,
            participation,
            sensors,
            chi,
            repeats,
            horizon,
            seed,
            out,
            jobs,
        } => {
            let outcome = cmd_event_rate(&EventRateOpts {
                theta,
                participation,
                sensors,
                chi,
                repeats,
                horizon,
                seed,
                out,
                jobs,
            })?;
            println!(
                "true rate {} estimated as {} (|error| {}); wrote {}",
                outcome.report.theta_true,
                outcome.report.mean_estimate,
                (outcome.report.mean_estimate - outcome.report.theta_true).abs(),
                outcome.metrics_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
