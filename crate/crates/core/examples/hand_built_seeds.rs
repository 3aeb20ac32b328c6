//! Small hand-built configurations and how each half-ray stops.

use gilbert_tess::{resolve_half_rays, simulate, BoxDomain, Direction, Point2, SeedSet, Side, Stop};

fn describe(set: &SeedSet, horizon: f64) -> gilbert_tess::Result<()> {
    let t = simulate(set, horizon)?;
    for r in t.half_rays() {
        let seed = set.get(r.seed_id).unwrap();
        let how = match r.stop {
            Stop::FreeAtHorizon => "free at horizon".to_string(),
            Stop::Blocked { seed_id, side, point, degenerate } => format!(
                "blocked by {seed_id}{} at {point}{}",
                side.symbol(),
                if degenerate { " (simultaneous arrival)" } else { "" }
            ),
        };
        println!(
            "  seed {} {} {}{}: length {}, {how}",
            r.seed_id,
            seed.position,
            seed.mark.code(),
            r.side.symbol(),
            r.length
        );
    }
    Ok(())
}

fn main() -> gilbert_tess::Result<()> {
    let domain = BoxDomain::new(4.0)?;
    use Direction::{Horizontal as H, Vertical as V};

    println!("two seeds:");
    let two = SeedSet::from_points(domain, &[(Point2::new(1.0, 1.0), H), (Point2::new(2.0, 3.0), V)])?;
    describe(&two, 4.0)?;

    println!("perpendicular trap, v arrives first:");
    let trap = SeedSet::from_points(domain, &[(Point2::new(0.5, 2.0), H), (Point2::new(1.5, 1.4), V)])?;
    describe(&trap, 4.0)?;

    println!("perpendicular trap with equal arrival times:");
    let tie = SeedSet::from_points(domain, &[(Point2::new(1.0, 2.0), H), (Point2::new(2.0, 1.0), V)])?;
    describe(&tie, 4.0)?;

    // only the two rays of interest are resolved; the rest of the event queue is left unprocessed
    let rays = resolve_half_rays(&trap, 3.0, &[(0, Side::Plus), (1, Side::Plus)])?;
    println!("resolved on demand: {:?} / {:?}", rays[0].length, rays[1].length);
    Ok(())
}
