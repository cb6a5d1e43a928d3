//! Train the agent on the five-level reference scenario and report per-type
//! throughput at the end.
//!
//! ```bash
//! cargo run --release -p noma-ra --example train_reference -- geomean 4000 7
//! ```
//!
//! An optional fourth argument picks the start: `uniform`, or a per-type
//! transmit probability such as `0.025`.

use std::time::Instant;

use noma_ra::ppo::{train, InitPolicy, PpoConfig, TrainOptions};
use noma_ra::{RewardKind, Scenario};

fn main() -> noma_ra::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: RewardKind = args.next().as_deref().unwrap_or("geomean").parse()?;
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let ppo = PpoConfig {
        init: match args.next() {
            Some(s) if s == "uniform" => InitPolicy::Uniform,
            Some(s) => InitPolicy::TransmitProb(s.parse().map_err(|_| {
                noma_ra::Error::InvalidArgument(format!("bad initial transmit probability {s}"))
            })?),
            None => InitPolicy::Auto,
        },
        ..PpoConfig::default()
    };

    let scenario = Scenario::reference();
    let started = Instant::now();
    let history = train(&scenario, &ppo, &TrainOptions::new(kind, epochs, seed))?;
    println!(
        "trained {} epochs in {:.1?}",
        history.rows.len(),
        started.elapsed()
    );

    for chunk in history.rows.chunks((epochs / 10).max(1)) {
        let n = chunk.len() as f64;
        let avg = |f: fn(&noma_ra::ppo::HistoryRow) -> f64| chunk.iter().map(f).sum::<f64>() / n;
        println!(
            "epochs {:>5}..  reward {:.4}  total {:.3}  geo {:.4}  min {:.4}",
            chunk[0].epoch,
            avg(|r| r.reward),
            avg(|r| r.total),
            avg(|r| r.geo_mean),
            avg(|r| r.min_throughput),
        );
    }

    let matrix = history.final_matrix(&scenario)?;
    println!("\nmean-action matrix (rows = type, last column = idle):");
    for (t, row) in matrix.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "  type {}: [{}]  idle {:.3}",
            t + 1,
            cells.join(", "),
            matrix.idle_prob(t)
        );
    }
    let tail = history.rows.len().min(200);
    let m = scenario.num_levels();
    let type_means: Vec<f64> = (0..m)
        .map(|t| history.tail_mean(tail, |r| r.type_means[t]))
        .collect();
    println!("\nper-type mean throughput over the last {tail} epochs: {type_means:.4?}");
    Ok(())
}
