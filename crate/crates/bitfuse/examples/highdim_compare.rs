//! Twelve-dimensional comparison: one bit per message (coordinate
//! cycling) against one bit per coordinate per message.
//!
//! ```bash
//! cargo run --release --example highdim_compare
//! ```

use bitfuse::experiments::highdim_compare;
use bitfuse::scenarios;

fn main() -> bitfuse::Result<()> {
    let one_bit = scenarios::highdim_config(true);
    let multi_bit = scenarios::highdim_config(false);
    let theta = scenarios::highdim_theta();

    let report = highdim_compare(&one_bit, &multi_bit, &theta, 20, 10_000, 3)?;
    println!("per-coordinate MSE at k = {}:", report.probe_k);
    println!("  one bit per message:     {:.6e}", report.one_bit_mse);
    println!("  bit per coordinate:      {:.6e}", report.multi_bit_mse);
    println!(
        "bits transmitted: {} vs {} ({}x)",
        report.one_bit_total_bits,
        report.multi_bit_total_bits,
        report.multi_bit_total_bits / report.one_bit_total_bits
    );

    std::fs::create_dir_all("out/highdim")?;
    let mut csv = String::from("k,one_bit_mse,multi_bit_mse\n");
    for k in 1..=report.one_bit_series.len() {
        csv.push_str(&format!(
            "{k},{},{}\n",
            report.one_bit_series[k - 1],
            report.multi_bit_series[k - 1]
        ));
    }
    std::fs::write("out/highdim/highdim.csv", csv)?;
    println!("wrote out/highdim/highdim.csv");
    Ok(())
}
