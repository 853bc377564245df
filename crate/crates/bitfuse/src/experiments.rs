//! Monte Carlo experiment drivers.
//!
//! Each driver repeats seeded runs of the recursion (in parallel, with
//! per-run substreams, so results do not depend on scheduling), averages
//! squared errors across runs and sensors, and emits plot-ready CSV.
//! Slope fits against the step index verify the predicted decay
//! exponents: leakage bounds fall like `k^-chi`, estimation error like
//! `k^-(nu - chi/2)` once the trade-off knob `chi` is in play.

use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{self, default_warmup, AlgorithmConfig, RunOutput};
use crate::privacy::{rate_fit, BoundForm, FisherBoundConfig, RateFit};

/// What a prepared experiment is for; recorded in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    NoCommBaseline,
    PrivacyCurves,
    Tradeoff,
    HighdimCompare,
    EventRateSynthetic,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::NoCommBaseline => "no_comm_baseline",
            ExperimentKind::PrivacyCurves => "privacy_curves",
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::HighdimCompare => "highdim_compare",
            ExperimentKind::EventRateSynthetic => "event_rate_synthetic",
        }
    }
}

/// A repeated-run experiment over one algorithm configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmConfig,
    pub theta: DVector<f64>,
    pub repeats: usize,
    pub horizon: usize,
    pub root_seed: u64,
    pub kind: ExperimentKind,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::InvalidConfig("repeats must be >= 1".into()));
        }
        if self.horizon < 10 {
            return Err(Error::InvalidConfig("horizon must be >= 10".into()));
        }
        Ok(())
    }
}

/// Averaged squared-error trajectory with per-step standard errors.
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    pub repeats: usize,
    pub horizon: usize,
    /// Mean over runs and sensors of the squared error at each step.
    pub mean_sq_error: Vec<f64>,
    /// Standard error over runs of the per-run sensor average.
    pub stderr: Vec<f64>,
    /// Mean final per-sensor estimate, averaged over runs and sensors.
    pub mean_final_estimate: DVector<f64>,
}

impl MonteCarloSummary {
    pub fn at(&self, k: usize) -> f64 {
        self.mean_sq_error[k - 1]
    }

    /// Mean and standard error (over runs would require the raw series;
    /// this uses the recorded per-step stderr) of the late window
    /// `[k_lo, k_hi]`.
    pub fn window_mean(&self, k_lo: usize, k_hi: usize) -> f64 {
        let lo = k_lo.max(1);
        let hi = k_hi.min(self.horizon);
        let n = hi + 1 - lo;
        self.mean_sq_error[lo - 1..hi].iter().sum::<f64>() / n as f64
    }

    pub fn write_metrics_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,mean_sq_error,stderr")?;
        for k in 1..=self.horizon {
            writeln!(
                w,
                "{},{},{}",
                k,
                self.mean_sq_error[k - 1],
                self.stderr[k - 1]
            )?;
        }
        Ok(())
    }
}

fn sensor_mean_series(out: &RunOutput) -> Vec<f64> {
    (1..=out.horizon)
        .map(|k| out.mean_over_sensors(k))
        .collect()
}

/// Repeated seeded runs, averaged. Deterministic for a fixed root seed
/// regardless of how the runs are scheduled.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<MonteCarloSummary> {
    cfg.validate()?;
    let runs: Vec<Result<(Vec<f64>, DVector<f64>)>> = (0..cfg.repeats as u64)
        .into_par_iter()
        .map(|run_index| {
            let out = estimator::run_indexed(
                &cfg.algorithm,
                &cfg.theta,
                cfg.horizon,
                cfg.root_seed,
                run_index,
            )
            .map_err(|e| Error::Numeric(format!("run {run_index}: {e}")))?;
            let mut final_mean = DVector::zeros(cfg.algorithm.dimension());
            for est in &out.final_state.estimates {
                final_mean += est;
            }
            final_mean /= cfg.algorithm.sensor_count() as f64;
            Ok((sensor_mean_series(&out), final_mean))
        })
        .collect();

    let mut series = Vec::with_capacity(cfg.repeats);
    let mut final_mean = DVector::zeros(cfg.algorithm.dimension());
    for r in runs {
        let (s, f) = r?;
        series.push(s);
        final_mean += f;
    }
    final_mean /= cfg.repeats as f64;

    let r = cfg.repeats as f64;
    let mut mean = vec![0.0f64; cfg.horizon];
    let mut stderr = vec![0.0f64; cfg.horizon];
    for s in &series {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= r;
    }
    if cfg.repeats > 1 {
        for s in &series {
            for ((e, v), m) in stderr.iter_mut().zip(s).zip(&mean) {
                *e += (v - m) * (v - m);
            }
        }
        for e in stderr.iter_mut() {
            *e = (*e / (r - 1.0)).sqrt() / r.sqrt();
        }
    }
    Ok(MonteCarloSummary {
        repeats: cfg.repeats,
        horizon: cfg.horizon,
        mean_sq_error: mean,
        stderr,
        mean_final_estimate: final_mean,
    })
}

/// Step-size and noise-growth tuple realizing one point of the
/// privacy/convergence trade-off.
#[derive(Debug, Clone, Copy)]
pub struct TradeoffPoint {
    pub chi: f64,
    pub nu: f64,
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
    pub beta_base: f64,
    pub warmup: usize,
}

/// Synthesize the schedule for a target leakage decay `k^-chi` and error
/// decay `k^-(nu - chi/2)`: `delta = 1`, `eps = (chi-1)/2`,
/// `gamma = (2 + nu - chi)/2`, `beta_1` one above its strict lower bound
/// `(2-chi) / (2 lambda_min_plus)`.
pub fn tradeoff_params(nu: f64, chi: f64, lambda_min_plus: f64) -> Result<TradeoffPoint> {
    if !(0.5 < nu && nu < 1.0) {
        return Err(Error::Domain(format!("nu = {nu} outside (1/2, 1)")));
    }
    if !(1.0..=2.0 * nu).contains(&chi) || chi >= 2.0 * nu {
        return Err(Error::Domain(format!(
            "chi = {chi} outside [1, 2 nu) with nu = {nu}"
        )));
    }
    if lambda_min_plus <= 0.0 {
        return Err(Error::Domain("lambda_min_plus must be positive".into()));
    }
    let delta = 1.0;
    let beta_base = (2.0 - chi) / (2.0 * lambda_min_plus) + 1.0;
    Ok(TradeoffPoint {
        chi,
        nu,
        eps: (chi - 1.0) / 2.0,
        gamma: (2.0 + nu - chi) / 2.0,
        delta,
        beta_base,
        warmup: default_warmup(beta_base, delta),
    })
}

/// One sweep row: fitted leakage-bound and error slopes plus the
/// late-window error level used for the separation test.
#[derive(Debug, Clone, Copy)]
pub struct TradeoffRow {
    pub chi: f64,
    pub bound_slope: f64,
    pub bound_halfwidth: f64,
    pub mse_slope: f64,
    pub mse_halfwidth: f64,
    pub late_mse_mean: f64,
    pub late_mse_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingVerdict {
    /// Bound slopes strictly decrease with chi and late-window error
    /// strictly increases with separation.
    Monotone,
    /// Two sweep points coincide.
    Tie,
    InsufficientPoints,
    Violated(String),
}

impl OrderingVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            OrderingVerdict::Monotone => "monotone",
            OrderingVerdict::Tie => "tie",
            OrderingVerdict::InsufficientPoints => "insufficient points",
            OrderingVerdict::Violated(_) => "violated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TradeoffReport {
    pub rows: Vec<TradeoffRow>,
    pub verdict: OrderingVerdict,
}

impl TradeoffReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "chi,bound_slope,mse_slope")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.chi, r.bound_slope, r.mse_slope)?;
        }
        Ok(())
    }
}

/// Run the sweep: for each point, Monte Carlo the error trajectory and
/// fit both slopes, then judge the orderings. `build` materializes the
/// algorithm configuration and true parameter for a point; `bound_sensor`
/// selects whose leakage bound is fitted.
#[allow(clippy::too_many_arguments)]
pub fn tradeoff_sweep<F>(
    points: &[TradeoffPoint],
    repeats: usize,
    horizon: usize,
    root_seed: u64,
    bound_sensor: usize,
    build: F,
) -> Result<TradeoffReport>
where
    F: Fn(&TradeoffPoint) -> Result<(AlgorithmConfig, DVector<f64>)>,
{
    let mut rows = Vec::with_capacity(points.len());
    let fit_lo = (horizon / 100).max(2);
    let late_lo = (horizon / 10).max(1);
    for p in points {
        let (algorithm, theta) = build(p)?;
        let fisher = FisherBoundConfig::from_algorithm(&algorithm, bound_sensor)?;
        let ks = crate::privacy::log_grid(fit_lo.max(fisher.beta.warmup + 1), horizon, 60);
        let traj = fisher.trajectory(&ks, BoundForm::Rate)?;
        let bound_fit = rate_fit(&traj.times, &traj.scalar_series, fit_lo, horizon)?;

        let cfg = ExperimentConfig {
            algorithm,
            theta,
            repeats,
            horizon,
            root_seed,
            kind: ExperimentKind::Tradeoff,
        };
        let summary = monte_carlo(&cfg)?;
        let times: Vec<usize> = (1..=horizon).collect();
        let mse_fit = rate_fit(&times, &summary.mean_sq_error, fit_lo, horizon)?;

        // Late-window level and its standard error (mean of the per-step
        // standard errors scaled by the window correlation is pessimistic;
        // use the final-decade average of both series).
        let late_mean = summary.window_mean(late_lo, horizon);
        let late_se = summary.stderr[late_lo - 1..horizon].iter().sum::<f64>()
            / (horizon - late_lo + 1) as f64;

        rows.push(TradeoffRow {
            chi: p.chi,
            bound_slope: bound_fit.slope,
            bound_halfwidth: bound_fit.halfwidth,
            mse_slope: mse_fit.slope,
            mse_halfwidth: mse_fit.halfwidth,
            late_mse_mean: late_mean,
            late_mse_stderr: late_se,
        });
    }
    let verdict = judge_ordering(&rows);
    Ok(TradeoffReport { rows, verdict })
}

fn judge_ordering(rows: &[TradeoffRow]) -> OrderingVerdict {
    if rows.len() < 2 {
        return OrderingVerdict::InsufficientPoints;
    }
    for w in rows.windows(2) {
        if w[0].chi == w[1].chi {
            return OrderingVerdict::Tie;
        }
    }
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.bound_slope >= a.bound_slope {
            return OrderingVerdict::Violated(format!(
                "bound slope not decreasing: chi {} -> {} gives {} -> {}",
                a.chi, b.chi, a.bound_slope, b.bound_slope
            ));
        }
        let gap = b.late_mse_mean - a.late_mse_mean;
        let sep = 3.0 * (a.late_mse_stderr.powi(2) + b.late_mse_stderr.powi(2)).sqrt();
        if gap <= sep {
            return OrderingVerdict::Violated(format!(
                "late-window error not separated: chi {} -> {} gives {} -> {} (needs gap > {sep})",
                a.chi, b.chi, a.late_mse_mean, b.late_mse_mean
            ));
        }
    }
    OrderingVerdict::Monotone
}

/// Paired one-bit vs per-coordinate runs of the twelve-dimensional setup.
#[derive(Debug, Clone)]
pub struct HighdimReport {
    pub probe_k: usize,
    /// Per-coordinate-normalized MSE of the one-bit variant at `probe_k`,
    /// averaged over repeats.
    pub one_bit_mse: f64,
    pub multi_bit_mse: f64,
    pub one_bit_series: Vec<f64>,
    pub multi_bit_series: Vec<f64>,
    pub one_bit_total_bits: u64,
    pub multi_bit_total_bits: u64,
}

/// Identical seeds on both sides; only the compression flag differs (the
/// per-purpose random streams keep graph, failures and observation noise
/// aligned across the pair).
pub fn highdim_compare(
    one_bit: &AlgorithmConfig,
    multi_bit: &AlgorithmConfig,
    theta: &DVector<f64>,
    repeats: usize,
    horizon: usize,
    root_seed: u64,
) -> Result<HighdimReport> {
    if !one_bit.use_compression() || multi_bit.use_compression() {
        return Err(Error::InvalidConfig(
            "highdim_compare expects (compressed, uncompressed) configs in that order".into(),
        ));
    }
    let n = one_bit.dimension() as f64;
    let probe_k = horizon.min(10_000);
    let run_pair = |cfg: &AlgorithmConfig| -> Result<(Vec<f64>, u64)> {
        let mut mean = vec![0.0f64; horizon];
        let mut bits = 0u64;
        for run_index in 0..repeats as u64 {
            let out = estimator::run_indexed(cfg, theta, horizon, root_seed, run_index)?;
            for (k, m) in mean.iter_mut().enumerate() {
                *m += out.mean_over_sensors(k + 1) / n;
            }
            bits += out.total_bits();
        }
        for m in mean.iter_mut() {
            *m /= repeats as f64;
        }
        Ok((mean, bits))
    };
    let (one_series, one_bits) = run_pair(one_bit)?;
    let (multi_series, multi_bits) = run_pair(multi_bit)?;
    Ok(HighdimReport {
        probe_k,
        one_bit_mse: one_series[probe_k - 1],
        multi_bit_mse: multi_series[probe_k - 1],
        one_bit_series: one_series,
        multi_bit_series: multi_series,
        one_bit_total_bits: one_bits,
        multi_bit_total_bits: multi_bits,
    })
}

/// Synthetic clinical event-rate study outputs.
#[derive(Debug, Clone)]
pub struct EventRateReport {
    pub theta_true: f64,
    pub mean_estimate: f64,
    pub summary: MonteCarloSummary,
}

/// Binary observations with the configured participation rate; reports
/// the error trajectory and the final mean estimate across sensors and
/// repeats.
pub fn event_rate_synthetic(
    setup: &crate::scenarios::EventRateSetup,
    theta_true: f64,
    repeats: usize,
    horizon: usize,
    root_seed: u64,
) -> Result<EventRateReport> {
    if !(0.0..=1.0).contains(&theta_true) {
        return Err(Error::Domain(format!(
            "event rate {theta_true} outside [0, 1]"
        )));
    }
    let algorithm = crate::scenarios::event_rate_config(setup);
    let cfg = ExperimentConfig {
        algorithm,
        theta: DVector::from_column_slice(&[theta_true]),
        repeats,
        horizon,
        root_seed,
        kind: ExperimentKind::EventRateSynthetic,
    };
    let summary = monte_carlo(&cfg)?;
    Ok(EventRateReport {
        theta_true,
        mean_estimate: summary.mean_final_estimate[0],
        summary,
    })
}

/// Fit of a decay slope over the default late window `[T/100, T]`.
pub fn mse_slope(summary: &MonteCarloSummary) -> Result<RateFit> {
    let times: Vec<usize> = (1..=summary.horizon).collect();
    rate_fit(
        &times,
        &summary.mean_sq_error,
        (summary.horizon / 100).max(2),
        summary.horizon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseFamily;
    use crate::scenarios;

    fn small_experiment(repeats: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            algorithm: scenarios::reference_config(NoiseFamily::Gaussian),
            theta: scenarios::reference_theta(),
            repeats,
            horizon: 400,
            root_seed: seed,
            kind: ExperimentKind::Convergence,
        }
    }

    #[test]
    fn single_repeat_equals_single_run() {
        let cfg = small_experiment(1, 5);
        let summary = monte_carlo(&cfg).unwrap();
        let run = estimator::run_indexed(&cfg.algorithm, &cfg.theta, 400, 5, 0).unwrap();
        for k in 1..=400 {
            assert_eq!(summary.at(k), run.mean_over_sensors(k));
        }
        assert!(summary.stderr.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn parallel_and_serial_schedules_agree_bytewise() {
        let cfg = small_experiment(6, 11);
        let serial_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let parallel_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = serial_pool.install(|| monte_carlo(&cfg)).unwrap();
        let b = parallel_pool.install(|| monte_carlo(&cfg)).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.write_metrics_csv(&mut buf_a).unwrap();
        b.write_metrics_csv(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn doubling_repeats_shrinks_standard_errors() {
        // Bootstrap-style check: stderr at the probe step scales like
        // 1/sqrt(repeats) within 30%.
        let probe = 300;
        let s20 = monte_carlo(&small_experiment(20, 77)).unwrap();
        let s40 = monte_carlo(&ExperimentConfig {
            repeats: 40,
            ..small_experiment(20, 77)
        })
        .unwrap();
        let ratio = s40.stderr[probe - 1] / s20.stderr[probe - 1];
        let expected = (0.5f64).sqrt();
        assert!(
            (ratio - expected).abs() < 0.3 * expected,
            "ratio={ratio}, expected about {expected}"
        );
    }

    #[test]
    fn tradeoff_params_examples() {
        let p = tradeoff_params(0.95, 1.3, 1.0).unwrap();
        assert!((p.eps - 0.15).abs() < 1e-15);
        assert!((p.gamma - 0.825).abs() < 1e-15);
        assert_eq!(p.delta, 1.0);
        assert!((p.beta_base - 1.35).abs() < 1e-15);
        assert!(p.beta_base < (p.warmup as f64).powf(p.delta));

        let p = tradeoff_params(0.95, 1.0, 1.0).unwrap();
        assert_eq!(p.eps, 0.0);
        assert!((p.gamma - 0.975).abs() < 1e-15);

        assert!(tradeoff_params(0.96, 1.9, 1.0).is_ok());
        assert!(tradeoff_params(0.94, 1.9, 1.0).is_err());
        assert!(tradeoff_params(0.95, 2.0, 1.0).is_err());
        assert!(tradeoff_params(1.0, 1.3, 1.0).is_err());
    }

    #[test]
    fn tradeoff_sweep_judges_ties_and_short_grids() {
        let p = tradeoff_params(0.9, 1.3, 1.0).unwrap();
        let build =
            |pt: &TradeoffPoint| Ok((scenarios::tradeoff_config(pt), scenarios::reference_theta()));
        let report = tradeoff_sweep(&[p], 2, 200, 3, 0, build).unwrap();
        assert_eq!(report.verdict, OrderingVerdict::InsufficientPoints);

        let report = tradeoffs_pair_same(p);
        assert_eq!(report.verdict, OrderingVerdict::Tie);
    }

    fn tradeoffs_pair_same(p: TradeoffPoint) -> TradeoffReport {
        let build =
            |pt: &TradeoffPoint| Ok((scenarios::tradeoff_config(pt), scenarios::reference_theta()));
        tradeoff_sweep(&[p, p], 2, 200, 3, 0, build).unwrap()
    }

    #[test]
    fn highdim_guard_rejects_misordered_configs() {
        let a = scenarios::highdim_config(true);
        let b = scenarios::highdim_config(false);
        let theta = scenarios::highdim_theta();
        assert!(highdim_compare(&b, &a, &theta, 1, 100, 0).is_err());
    }

    #[test]
    fn highdim_bits_scale_with_dimension() {
        let a = scenarios::highdim_config(true);
        let b = scenarios::highdim_config(false);
        let theta = scenarios::highdim_theta();
        let report = highdim_compare(&a, &b, &theta, 2, 200, 9).unwrap();
        assert_eq!(report.multi_bit_total_bits, 12 * report.one_bit_total_bits);
    }

    #[test]
    fn event_rate_zero_rate_converges_toward_zero() {
        let report =
            event_rate_synthetic(&scenarios::EventRateSetup::default(), 0.0, 2, 2_000, 21).unwrap();
        assert!(report.summary.at(2_000) < report.summary.at(10) / 10.0);
        assert!(report.mean_estimate.abs() < 0.05);
    }

    #[test]
    fn experiment_preconditions() {
        let mut cfg = small_experiment(1, 0);
        cfg.repeats = 0;
        assert!(monte_carlo(&cfg).is_err());
        let mut cfg = small_experiment(1, 0);
        cfg.horizon = 5;
        assert!(monte_carlo(&cfg).is_err());
        assert!(
            event_rate_synthetic(&scenarios::EventRateSetup::default(), 1.5, 1, 100, 0).is_err()
        );
    }
}
