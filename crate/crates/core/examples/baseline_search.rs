//! Reference optimizers: exhaustive lattice search on a tiny instance and
//! random search on a slightly larger one.
//!
//! ```bash
//! cargo run --release -p noma-ra --example baseline_search
//! ```

use noma_ra::{grid_search, random_search, DevicePopulation, RewardKind, Scenario};

fn main() -> noma_ra::Result<()> {
    let levels = Scenario::reference().truncated(2)?.levels;
    let pop = DevicePopulation::new(vec![2, 2]);
    for kind in RewardKind::ALL {
        let r = grid_search(&pop, &levels, kind, 51)?;
        println!(
            "grid   {kind:>8}: {:.4} at {:?} ({} evaluations)",
            r.reward,
            r.matrix.rows(),
            r.evaluations
        );
    }

    let levels = Scenario::reference().truncated(3)?.levels;
    let pop = DevicePopulation::new(vec![2, 1, 2]);
    let r = random_search(&pop, &levels, RewardKind::GeometricMean, 2000, 0)?;
    println!(
        "random geomean: {:.4} at {:.3?} via {}",
        r.reward,
        r.matrix.rows(),
        r.evaluator
    );
    Ok(())
}
