//! Command implementations behind the `bitfuse` binary.
//!
//! Each command reads a TOML configuration, runs under an optional rayon
//! pool (`--jobs`; results never depend on the pool size), writes CSV
//! outputs plus a `manifest.toml` reproducibility record into the output
//! directory, and reports a typed outcome the binary turns into human
//! output and an exit code: 0 success, 1 validation/assumption failure,
//! 2 I/O or parse failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{load_config, LoadedConfig};
use crate::error::{Error, Result};
use crate::estimator::{validate_assumptions, AssumptionReport, BetaSchedule};
use crate::experiments::{
    self, EventRateReport, ExperimentConfig, ExperimentKind, HighdimReport, TradeoffReport,
};
use crate::privacy::{self, BoundForm, FisherBoundConfig};
use crate::scenarios::EventRateSetup;

/// Reproducibility record written next to every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output_dir: String,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub created_unix: u64,
}

impl RunManifest {
    fn new(command: &str, config: Option<&Path>, seed: Option<u64>, out: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            config_path: config.map(|p| p.display().to_string()),
            seed,
            output_dir: out.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: 0.0,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    fn write(&self, out: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(out.join("manifest.toml"), text)?;
        Ok(())
    }
}

fn prepare_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

/// Resolve the root seed: the given one, or a fresh random seed that the
/// manifest records (never silent).
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn require_theta(loaded: &LoadedConfig) -> Result<nalgebra::DVector<f64>> {
    loaded.theta.clone().ok_or_else(|| {
        Error::InvalidConfig("config has no [truth] theta; simulation needs one".into())
    })
}

fn write_csv(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `validate`: parse the config and report every standing assumption.
pub fn cmd_validate(config: &Path) -> Result<AssumptionReport> {
    let loaded = load_config(config)?;
    Ok(validate_assumptions(&loaded.algorithm))
}

#[derive(Debug, Clone)]
pub struct SimulateOpts {
    pub config: PathBuf,
    pub repeats: usize,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    /// Replace the topology set by an empty graph: the no-communication
    /// baseline.
    pub no_communication: bool,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub metrics_path: PathBuf,
    pub seed: u64,
    pub final_mean_sq_error: f64,
}

/// `simulate`: Monte Carlo the error trajectory and write `metrics.csv`.
pub fn cmd_simulate(opts: &SimulateOpts) -> Result<SimulateOutcome> {
    let start = Instant::now();
    let loaded = load_config(&opts.config)?;
    let report = validate_assumptions(&loaded.algorithm);
    if !report.all_passed() {
        let first = report.failures().next().expect("has failures");
        return Err(Error::Refused {
            inequality: format!("{}: {}", first.name, first.detail),
        });
    }
    let theta = require_theta(&loaded)?;
    let algorithm = if opts.no_communication {
        loaded.algorithm.without_communication()?
    } else {
        loaded.algorithm.clone()
    };
    let seed = resolve_seed(opts.seed);
    let cfg = ExperimentConfig {
        algorithm,
        theta,
        repeats: opts.repeats,
        horizon: opts.horizon,
        root_seed: seed,
        kind: if opts.no_communication {
            ExperimentKind::NoCommBaseline
        } else {
            ExperimentKind::Convergence
        },
    };
    let summary = with_jobs(opts.jobs, move || experiments::monte_carlo(&cfg))??;
    prepare_out_dir(&opts.out)?;
    let metrics_path = opts.out.join("metrics.csv");
    write_csv(&metrics_path, |w| summary.write_metrics_csv(w))?;
    let mut manifest = RunManifest::new("simulate", Some(&opts.config), Some(seed), &opts.out);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&opts.out)?;
    Ok(SimulateOutcome {
        metrics_path,
        seed,
        final_mean_sq_error: summary.at(opts.horizon),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormChoice {
    General,
    Rate,
}

#[derive(Debug, Clone)]
pub struct PrivacyBoundOpts {
    pub config: PathBuf,
    /// 1-based sensor index.
    pub sensor: usize,
    pub kmax: usize,
    pub form: FormChoice,
    pub points: usize,
    pub out: PathBuf,
    /// Use the exact distribution recursion for edge probabilities
    /// instead of the stationary constants (general form only).
    pub recursion_q: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrivacySummary {
    pub sensor: usize,
    pub form: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_halfwidth: Option<f64>,
    pub k_lo: usize,
    pub k_hi: usize,
    pub points: usize,
    /// Grid points below the pre-asymptotic threshold; their values are
    /// reported verbatim but should not feed decay fits.
    pub pre_asymptotic_points: usize,
    pub dynamically_enhanced: bool,
}

#[derive(Debug, Clone)]
pub struct PrivacyBoundOutcome {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: PrivacySummary,
}

/// `privacy-bound`: evaluate one sensor's leakage bound on a log grid,
/// write `privacy.csv` (scalar + flattened matrix per row) and a JSON
/// summary with the fitted decay slope.
pub fn cmd_privacy_bound(opts: &PrivacyBoundOpts) -> Result<PrivacyBoundOutcome> {
    let start = Instant::now();
    let loaded = load_config(&opts.config)?;
    if opts.sensor == 0 || opts.sensor > loaded.algorithm.sensor_count() {
        return Err(Error::Domain(format!(
            "sensor index {} out of range (1..={})",
            opts.sensor,
            loaded.algorithm.sensor_count()
        )));
    }
    let fisher = if opts.recursion_q {
        FisherBoundConfig::from_algorithm_with_recursion(&loaded.algorithm, opts.sensor - 1)?
    } else {
        FisherBoundConfig::from_algorithm(&loaded.algorithm, opts.sensor - 1)?
    };
    let form = match opts.form {
        FormChoice::General => BoundForm::General,
        FormChoice::Rate => BoundForm::Rate,
    };
    let k_lo = fisher.beta.warmup.max(2);
    if opts.kmax <= k_lo {
        return Err(Error::Domain(format!(
            "kmax = {} must exceed the warmup {k_lo}",
            opts.kmax
        )));
    }
    let ks = privacy::log_grid(k_lo, opts.kmax, opts.points.max(2));
    let traj = fisher.trajectory(&ks, form)?;

    prepare_out_dir(&opts.out)?;
    let csv_path = opts.out.join("privacy.csv");
    let n = loaded.algorithm.dimension();
    write_csv(&csv_path, |w| {
        let mut header = String::from("k,sensor,bound_scalar");
        for r in 0..n {
            for c in 0..n {
                header.push_str(&format!(",m{r}{c}"));
            }
        }
        writeln!(w, "{header}")?;
        for (idx, &k) in traj.times.iter().enumerate() {
            let mut line = format!("{},{},{}", k, opts.sensor, traj.scalar_series[idx]);
            for r in 0..n {
                for c in 0..n {
                    line.push_str(&format!(",{}", traj.bounds[idx][(r, c)]));
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;

    // Fit on the late decade(s); skip when the series is identically zero
    // (blind sensor or empty neighbourhood).
    let fit_lo = (opts.kmax / 100).max(k_lo);
    let positive = traj.scalar_series.iter().any(|&v| v > 0.0);
    let fit = if positive {
        Some(privacy::rate_fit(
            &traj.times,
            &traj.scalar_series,
            fit_lo,
            opts.kmax,
        )?)
    } else {
        None
    };
    let enhanced = if positive {
        privacy::dynamic_enhancement_check(&traj)?.holds
    } else {
        true
    };
    let summary = PrivacySummary {
        sensor: opts.sensor,
        form: match opts.form {
            FormChoice::General => "general".into(),
            FormChoice::Rate => "rate".into(),
        },
        slope: fit.map(|f| f.slope),
        slope_halfwidth: fit.map(|f| f.halfwidth),
        k_lo,
        k_hi: opts.kmax,
        points: traj.times.len(),
        pre_asymptotic_points: traj
            .times
            .iter()
            .filter(|&&k| k < privacy::PRE_ASYMPTOTIC_BELOW)
            .count(),
        dynamically_enhanced: enhanced,
    };
    let summary_path = opts.out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(&summary_path, json)?;
    let mut manifest = RunManifest::new("privacy-bound", Some(&opts.config), None, &opts.out);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&opts.out)?;
    Ok(PrivacyBoundOutcome {
        csv_path,
        summary_path,
        summary,
    })
}

#[derive(Debug, Clone)]
pub struct TradeoffOpts {
    pub config: PathBuf,
    pub nu: f64,
    pub chi_list: Vec<f64>,
    pub repeats: usize,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TradeoffOutcome {
    pub csv_path: PathBuf,
    pub report: TradeoffReport,
    pub seed: u64,
}

/// `tradeoff`: synthesize schedules for each requested decay target and
/// sweep them; infeasible targets are rejected upfront.
pub fn cmd_tradeoff(opts: &TradeoffOpts) -> Result<TradeoffOutcome> {
    let start = Instant::now();
    let loaded = load_config(&opts.config)?;
    let theta = require_theta(&loaded)?;

    // The synthesized innovation gain must clear the bound for every
    // sensor: use the smallest positive-eigenvalue floor.
    let lambda = loaded
        .algorithm
        .sensors()
        .iter()
        .filter_map(|s| s.spectral().lambda_min_plus)
        .fold(f64::INFINITY, f64::min);
    if !lambda.is_finite() {
        return Err(Error::InvalidConfig(
            "no sensor has a positive-rank Gram matrix".into(),
        ));
    }
    let mut points = Vec::with_capacity(opts.chi_list.len());
    for &chi in &opts.chi_list {
        points.push(experiments::tradeoff_params(opts.nu, chi, lambda)?);
    }

    let seed = resolve_seed(opts.seed);
    let base = loaded.algorithm.clone();
    let build = move |p: &experiments::TradeoffPoint| {
        let cfg = base
            .with_uniform_noise_growth(p.eps)?
            .with_uniform_gamma(p.gamma)?
            .with_uniform_beta(BetaSchedule {
                base: p.beta_base,
                exponent: p.delta,
                warmup: p.warmup,
            })?;
        Ok((cfg, theta.clone()))
    };
    let repeats = opts.repeats;
    let horizon = opts.horizon;
    let report = with_jobs(opts.jobs, move || {
        experiments::tradeoff_sweep(&points, repeats, horizon, seed, 0, build)
    })??;

    prepare_out_dir(&opts.out)?;
    let csv_path = opts.out.join("tradeoff.csv");
    write_csv(&csv_path, |w| report.write_csv(w))?;
    let verdict = serde_json::json!({
        "verdict": report.verdict.name(),
        "nu": opts.nu,
        "chi": opts.chi_list,
    });
    std::fs::write(
        opts.out.join("summary.json"),
        serde_json::to_string_pretty(&verdict).map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    let mut manifest = RunManifest::new("tradeoff", Some(&opts.config), Some(seed), &opts.out);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&opts.out)?;
    Ok(TradeoffOutcome {
        csv_path,
        report,
        seed,
    })
}

#[derive(Debug, Clone)]
pub struct HighdimOpts {
    pub config: PathBuf,
    pub repeats: usize,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct HighdimOutcome {
    pub csv_path: PathBuf,
    pub report: HighdimReport,
    pub seed: u64,
}

/// `highdim-compare`: paired one-bit vs per-coordinate runs on the same
/// seeds; writes both normalized error trajectories.
pub fn cmd_highdim_compare(opts: &HighdimOpts) -> Result<HighdimOutcome> {
    let start = Instant::now();
    let loaded = load_config(&opts.config)?;
    let theta = require_theta(&loaded)?;
    let mut one_bit = loaded.algorithm.clone();
    one_bit.set_use_compression(true);
    let mut multi = loaded.algorithm.clone();
    multi.set_use_compression(false);
    let seed = resolve_seed(opts.seed);
    let repeats = opts.repeats;
    let horizon = opts.horizon;
    let report = with_jobs(opts.jobs, move || {
        experiments::highdim_compare(&one_bit, &multi, &theta, repeats, horizon, seed)
    })??;
    prepare_out_dir(&opts.out)?;
    let csv_path = opts.out.join("highdim.csv");
    write_csv(&csv_path, |w| {
        writeln!(w, "k,one_bit_mse,multi_bit_mse")?;
        for k in 1..=report.one_bit_series.len() {
            writeln!(
                w,
                "{},{},{}",
                k,
                report.one_bit_series[k - 1],
                report.multi_bit_series[k - 1]
            )?;
        }
        Ok(())
    })?;
    let summary = serde_json::json!({
        "probe_k": report.probe_k,
        "one_bit_mse": report.one_bit_mse,
        "multi_bit_mse": report.multi_bit_mse,
        "one_bit_total_bits": report.one_bit_total_bits,
        "multi_bit_total_bits": report.multi_bit_total_bits,
    });
    std::fs::write(
        opts.out.join("summary.json"),
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    let mut manifest =
        RunManifest::new("highdim-compare", Some(&opts.config), Some(seed), &opts.out);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&opts.out)?;
    Ok(HighdimOutcome {
        csv_path,
        report,
        seed,
    })
}

#[derive(Debug, Clone)]
pub struct EventRateOpts {
    pub theta: f64,
    pub participation: f64,
    pub sensors: usize,
    pub chi: f64,
    pub repeats: usize,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EventRateOutcome {
    pub metrics_path: PathBuf,
    pub report: EventRateReport,
    pub seed: u64,
}

/// `event-rate`: synthetic binary-observation study over independently
/// flickering links.
pub fn cmd_event_rate(opts: &EventRateOpts) -> Result<EventRateOutcome> {
    let start = Instant::now();
    let setup = EventRateSetup {
        sensor_count: opts.sensors,
        participation: opts.participation,
        chi: opts.chi,
    };
    let seed = resolve_seed(opts.seed);
    let theta = opts.theta;
    let repeats = opts.repeats;
    let horizon = opts.horizon;
    let report = with_jobs(opts.jobs, move || {
        experiments::event_rate_synthetic(&setup, theta, repeats, horizon, seed)
    })??;
    prepare_out_dir(&opts.out)?;
    let metrics_path = opts.out.join("metrics.csv");
    write_csv(&metrics_path, |w| report.summary.write_metrics_csv(w))?;
    let summary = serde_json::json!({
        "theta_true": report.theta_true,
        "mean_estimate": report.mean_estimate,
        "abs_error": (report.mean_estimate - report.theta_true).abs(),
    });
    std::fs::write(
        opts.out.join("summary.json"),
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    let mut manifest = RunManifest::new("event-rate", None, Some(seed), &opts.out);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&opts.out)?;
    Ok(EventRateOutcome {
        metrics_path,
        report,
        seed,
    })
}
