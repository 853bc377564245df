//! Heavier statistical invariants of the shipped setups.

use bitfuse::experiments::{monte_carlo, ExperimentConfig, ExperimentKind};
use bitfuse::noise::NoiseFamily;
use bitfuse::scenarios;

#[test]
fn error_distribution_improves_over_time() {
    // Mean squared error over 100 repeats drops from k = 100 to k = 10000
    // with at least three standard errors of separation.
    let cfg = ExperimentConfig {
        algorithm: scenarios::reference_config(NoiseFamily::Gaussian),
        theta: scenarios::reference_theta(),
        repeats: 100,
        horizon: 10_000,
        root_seed: 42,
        kind: ExperimentKind::Convergence,
    };
    let summary = monte_carlo(&cfg).unwrap();
    let (early, early_se) = (summary.at(100), summary.stderr[99]);
    let (late, late_se) = (summary.at(10_000), summary.stderr[9_999]);
    let sep = 3.0 * (early_se.powi(2) + late_se.powi(2)).sqrt();
    assert!(
        early - late > sep,
        "MSE {early} at k=100 vs {late} at k=10000 (needs gap > {sep})"
    );
}

#[test]
fn all_three_families_converge() {
    for family in [
        NoiseFamily::Gaussian,
        NoiseFamily::Laplace,
        NoiseFamily::Cauchy,
    ] {
        let cfg = ExperimentConfig {
            algorithm: scenarios::reference_config(family),
            theta: scenarios::reference_theta(),
            repeats: 5,
            horizon: 20_000,
            root_seed: 7,
            kind: ExperimentKind::Convergence,
        };
        let summary = monte_carlo(&cfg).unwrap();
        assert!(
            summary.at(20_000) < 0.05,
            "{family:?}: MSE at k=20000 is {}",
            summary.at(20_000)
        );
    }
}
