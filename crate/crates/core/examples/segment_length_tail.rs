//! Palm segment lengths: survival curve, exponential tail fit and intensity scaling.

use gilbert_tess::experiments::{scaling_experiment, tail_experiment};
use gilbert_tess::Direction;

fn main() -> gilbert_tess::Result<()> {
    let tail = tail_experiment(1.0, 10.0, 4000, 7, Direction::Horizontal, 30)?;
    println!("mean segment length {:.3}, censored {:.4}", tail.mean_length, tail.censored_fraction);
    println!(
        "log S(t) ≈ {:.3} - {:.3} t on [{:.2}, {:.2}], r² = {:.4}",
        tail.fit.intercept, tail.fit.rate, tail.fit.fit_range.0, tail.fit.fit_range.1, tail.fit.r_squared
    );
    for (t, s) in tail.curve.grid.iter().zip(&tail.curve.survival).step_by(6) {
        println!("  S({t:.2}) = {s:.4}");
    }

    let sc = scaling_experiment(1.0, 4.0, 10.0, 4000, 7, 30)?;
    println!("λ = 4 vs λ = 1: KS distance after rescaling {:.4}, rate ratio {:.3}", sc.ks_distance, sc.rate_ratio);
    Ok(())
}
