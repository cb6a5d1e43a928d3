//! How raw actions become transmission probabilities: each type's row is a
//! discretized Beta distribution over `n + 1` equal bins, the last of which
//! means "stay silent".
//!
//! ```bash
//! cargo run -p noma-ra --example beta_mapping
//! ```

use noma_ra::{action_for_transmit_prob, action_to_matrix, shape_params, RawAction};

fn print_matrix(title: &str, raw: &RawAction) -> noma_ra::Result<()> {
    let m = raw.levels();
    let matrix = action_to_matrix(raw, m)?;
    println!("{title}");
    for n in 0..m {
        let (a, b) = raw.pair(n);
        let (alpha, beta) = shape_params(a, b);
        println!(
            "  type {} Beta({alpha:.3}, {beta:.3}): {:.4?} idle {:.4}",
            n + 1,
            matrix.row(n),
            matrix.idle_prob(n)
        );
    }
    Ok(())
}

fn main() -> noma_ra::Result<()> {
    print_matrix("zero action", &RawAction(vec![0.0; 6]))?;
    print_matrix("Beta(2, 2) everywhere", &RawAction(vec![2f64.ln(); 6]))?;
    print_matrix(
        "5% transmit, top level first",
        &action_for_transmit_prob(3, 0.05)?,
    )?;
    Ok(())
}
