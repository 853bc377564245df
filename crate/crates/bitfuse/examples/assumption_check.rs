//! Assumption validation on a healthy configuration and on two broken
//! ones, showing which inequality each violation names.
//!
//! ```bash
//! cargo run --release --example assumption_check
//! ```

use bitfuse::estimator::validate_assumptions;
use bitfuse::noise::NoiseFamily;
use bitfuse::scenarios;

fn main() {
    println!("== flagship configuration ==");
    print!(
        "{}",
        validate_assumptions(&scenarios::reference_config(NoiseFamily::Gaussian))
    );

    println!("\n== gamma = 0.4 (fusion gain decays too slowly to square-sum) ==");
    print!(
        "{}",
        validate_assumptions(&scenarios::reference_config_with_gamma(
            NoiseFamily::Gaussian,
            0.4
        ))
    );

    println!("\n== eps = 0.3 with gamma = 0.8 (joint divergence fails) ==");
    print!(
        "{}",
        validate_assumptions(&scenarios::reference_config_with_growth(
            NoiseFamily::Gaussian,
            0.3
        ))
    );
}
