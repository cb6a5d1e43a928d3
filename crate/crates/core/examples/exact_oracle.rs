//! Exact expected throughput by enumeration, next to a long simulation.
//!
//! ```bash
//! cargo run --release -p noma-ra --example exact_oracle
//! ```

use noma_ra::{
    exact_expected_throughput, geometric_level_set, run_epoch, DevicePopulation, TransmissionMatrix,
};

fn main() -> noma_ra::Result<()> {
    let set = geometric_level_set(4.0, 1.0, 1.0, 3)?;
    let pop = DevicePopulation::new(vec![1, 2, 1]);
    let matrix = TransmissionMatrix::new(vec![vec![0.4], vec![0.1, 0.4], vec![0.1, 0.1, 0.5]])?;

    let exact = exact_expected_throughput(&matrix, &pop, &set)?;
    let mc = run_epoch(&matrix, &pop, &set, 200_000, 7)?;
    println!("type  exact     monte carlo");
    for (t, e) in exact.iter().enumerate() {
        println!(
            "{:>4}  {e:.5}   {:.5} +- {:.5}",
            t + 1,
            mc.type_means[t],
            mc.type_std_errors[t]
        );
    }
    Ok(())
}
