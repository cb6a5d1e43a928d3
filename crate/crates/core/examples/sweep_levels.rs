//! Converged reward as the number of power levels grows, with the same
//! population folded onto the available device types.
//!
//! ```bash
//! cargo run --release -p noma-ra --example sweep_levels -- min 3000
//! ```

use noma_ra::ppo::{train, PpoConfig, TrainOptions};
use noma_ra::{RewardKind, Scenario};

fn main() -> noma_ra::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: RewardKind = args.next().as_deref().unwrap_or("geomean").parse()?;
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3000);

    let base = Scenario::reference();
    for m in 2..=base.num_levels() {
        let scenario = base.truncated(m)?;
        let h = train(
            &scenario,
            &PpoConfig::default(),
            &TrainOptions::new(kind, epochs, 0),
        )?;
        println!(
            "M = {m} levels {:?} counts {:?}: {kind} {:.4}",
            scenario.levels.levels(),
            scenario.population.counts(),
            h.tail_mean(200, |r| r.reward)
        );
    }
    Ok(())
}
