//! Successive interference cancellation on a handful of hand-built slots.
//!
//! ```bash
//! cargo run -p noma-ra --example decode_slot
//! ```

use noma_ra::{decode_slot, Scenario, SlotTransmissions};

fn main() -> noma_ra::Result<()> {
    let set = Scenario::reference().levels;
    let slots = [
        vec![1, 1, 1, 1, 1],
        vec![0, 0, 0, 0, 1],
        vec![2, 0, 0, 0, 1],
        vec![0, 0, 3, 0, 0],
        vec![1, 0, 0, 2, 1],
    ];
    for counts in slots {
        let res = decode_slot(&SlotTransmissions::new(counts.clone()), &set)?;
        println!(
            "counts {counts:?}: {} decoded, {:.3} bits",
            res.decoded_count(),
            res.total_throughput()
        );
        for (level, g) in res.groups.iter().enumerate().rev() {
            if counts[level] > 0 {
                println!(
                    "  level {}: {:?} {:.3?}",
                    level + 1,
                    g.status,
                    g.throughputs
                );
            }
        }
    }
    Ok(())
}
