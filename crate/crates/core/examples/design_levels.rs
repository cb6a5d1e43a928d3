//! Geometric received-power ladder for a given peak power, SINR threshold
//! and noise floor.
//!
//! ```bash
//! cargo run -p noma-ra --example design_levels -- 16 1 1
//! ```

use noma_ra::{geometric_level_set, max_num_levels};

fn main() -> noma_ra::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>());
    let mut next = |default: f64| args.next().transpose().map(|v| v.unwrap_or(default));
    let parse_err = |e: std::num::ParseFloatError| noma_ra::Error::InvalidArgument(e.to_string());
    let v_max = next(16.0).map_err(parse_err)?;
    let gamma = next(1.0).map_err(parse_err)?;
    let noise = next(1.0).map_err(parse_err)?;

    let m = max_num_levels(v_max, gamma, noise)?;
    let set = geometric_level_set(v_max, gamma, noise, m)?;
    println!("at most {m} levels: {:?}", set.levels());

    // every level must clear the threshold against everything below it
    for (i, &v) in set.levels().iter().enumerate() {
        let below: f64 = set.levels()[..i].iter().sum();
        println!(
            "  V{} = {v:<8} SINR alone over lower levels = {:.3}",
            i + 1,
            v / (below + noise)
        );
    }
    match geometric_level_set(v_max, gamma, noise, m + 1) {
        Ok(_) => println!("unexpected: {} levels also fit", m + 1),
        Err(e) => println!("{} levels: {e}", m + 1),
    }
    Ok(())
}
