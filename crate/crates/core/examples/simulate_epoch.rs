//! One Monte Carlo epoch on the reference population, with rewards.
//!
//! ```bash
//! cargo run --release -p noma-ra --example simulate_epoch -- 0.02
//! ```
//!
//! The argument is each type's total transmit probability, spread evenly
//! over its reachable levels.

use noma_ra::{run_epoch, RewardKind, Scenario, TransmissionMatrix};

fn main() -> noma_ra::Result<()> {
    let p: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.02);
    let scenario = Scenario::reference();
    let m = scenario.num_levels();
    let rows = (1..=m).map(|n| vec![p / n as f64; n]).collect();
    let matrix = TransmissionMatrix::new(rows)?;

    let r = run_epoch(
        &matrix,
        &scenario.population,
        &scenario.levels,
        scenario.slots,
        1,
    )?;
    for (t, (mean, se)) in r.type_means.iter().zip(&r.type_std_errors).enumerate() {
        println!("type {}: {mean:.4} +- {se:.4}", t + 1);
    }
    for kind in RewardKind::ALL {
        println!("{kind:>8}: {:.4}", r.reward(kind)?);
    }
    Ok(())
}
