//! Error trajectories of the eight-sensor switching network, with and
//! without communication.
//!
//! ```bash
//! cargo run --release --example convergence
//! ```

use bitfuse::experiments::{monte_carlo, ExperimentConfig, ExperimentKind};
use bitfuse::noise::NoiseFamily;
use bitfuse::scenarios;

fn main() -> bitfuse::Result<()> {
    let horizon = 100_000;
    let repeats = 20;
    let seed = 1;

    let connected = ExperimentConfig {
        algorithm: scenarios::reference_config(NoiseFamily::Gaussian),
        theta: scenarios::reference_theta(),
        repeats,
        horizon,
        root_seed: seed,
        kind: ExperimentKind::Convergence,
    };
    let isolated = ExperimentConfig {
        algorithm: scenarios::no_comm_config(NoiseFamily::Gaussian),
        kind: ExperimentKind::NoCommBaseline,
        ..connected.clone()
    };

    let with_comm = monte_carlo(&connected)?;
    let without_comm = monte_carlo(&isolated)?;

    println!("k        with communication    no communication");
    for k in [10, 100, 1_000, 10_000, 100_000] {
        println!(
            "{k:<8} {:<21.6e} {:.6e}",
            with_comm.at(k),
            without_comm.at(k)
        );
    }
    println!(
        "\nln-MSE drop from k=10 to k={horizon}: {:.2} nats",
        (with_comm.at(10) / with_comm.at(horizon)).ln()
    );
    println!(
        "baseline / communicating MSE at k={horizon}: {:.1}x",
        without_comm.at(horizon) / with_comm.at(horizon)
    );

    std::fs::create_dir_all("out/convergence")?;
    let mut buf = Vec::new();
    with_comm.write_metrics_csv(&mut buf)?;
    std::fs::write("out/convergence/metrics.csv", buf)?;
    let mut buf = Vec::new();
    without_comm.write_metrics_csv(&mut buf)?;
    std::fs::write("out/convergence/metrics_no_comm.csv", buf)?;
    println!("wrote out/convergence/metrics.csv and metrics_no_comm.csv");
    Ok(())
}
