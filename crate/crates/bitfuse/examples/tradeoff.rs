//! Privacy/convergence trade-off sweep: larger chi buys a faster-decaying
//! leakage bound at the price of slower estimation.
//!
//! ```bash
//! cargo run --release --example tradeoff
//! ```

use bitfuse::experiments::{tradeoff_params, tradeoff_sweep};
use bitfuse::scenarios;

fn main() -> bitfuse::Result<()> {
    let nu = 0.96;
    let chis = [1.3, 1.6, 1.9];
    let points: Vec<_> = chis
        .iter()
        .map(|&chi| tradeoff_params(nu, chi, 1.0))
        .collect::<bitfuse::Result<_>>()?;

    let report = tradeoff_sweep(&points, 20, 100_000, 5, 0, |p| {
        Ok((scenarios::tradeoff_config(p), scenarios::reference_theta()))
    })?;

    println!("chi    bound slope    error slope    late-window MSE");
    for r in &report.rows {
        println!(
            "{:<6} {:<14.4} {:<14.4} {:.4e}",
            r.chi, r.bound_slope, r.mse_slope, r.late_mse_mean
        );
    }
    println!("ordering verdict: {}", report.verdict.name());

    std::fs::create_dir_all("out/tradeoff")?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    std::fs::write("out/tradeoff/tradeoff.csv", buf)?;
    println!("wrote out/tradeoff/tradeoff.csv");
    Ok(())
}
