//! Event-driven engine against the brute-force time-stepping oracle.

use gilbert_tess::experiments::oracle_check;
use gilbert_tess::{oracle_simulate, sample_poisson, simulate, BoxDomain, MarkDistribution};

fn main() -> gilbert_tess::Result<()> {
    let seeds = sample_poisson(BoxDomain::new(6.0)?, 1.0, MarkDistribution::default(), 8)?;
    for dt in [0.1, 0.01, 0.001] {
        let exact = simulate(&seeds, 6.0)?;
        let approx = oracle_simulate(&seeds, 6.0, dt)?;
        let differ =
            exact.half_rays().iter().zip(approx.half_rays()).filter(|(a, b)| a.blocker() != b.blocker()).count();
        println!("dt = {dt}: {differ} of {} stop causes differ", exact.half_rays().len());
    }

    let s = oracle_check(1.0, 10.0, 20, 1, 1e-3)?;
    println!(
        "20 instances in [0,10]²: {} mismatches, max length error {:e}, pass = {}",
        s.total_mismatches, s.max_length_error, s.pass
    );
    Ok(())
}
