//! Time-stepping reference for the growth dynamics.
//!
//! Shares nothing with the event engine except the output types: every
//! half-ray gets a brute-force list of all orthogonal lines ahead of it, and
//! time advances on a fixed grid of width `dt`. Within a step, a tip that
//! would pass a crossing stops there if the orthogonal half-ray already
//! covers the crossing point when the tip arrives, judged from the lengths
//! at the start of the step (a half-ray alive at the step start is assumed
//! to keep growing through it unless it stops earlier in the same step).
//! Decisions inside one step are iterated to a fixed point.

use crate::engine::{ray_index, HalfRay, Stop, Tessellation};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Side};
use crate::sampling::{check_general_position, SeedSet};

#[derive(Debug, Clone, Copy)]
struct Crossing {
    dist: f64,
    point: Point2,
    blocker: usize,
    blocker_side: Side,
    offset: f64,
}

/// Lengths are accurate to `O(dt)`; stop causes match the exact engine away from
/// near-simultaneous arrivals.
pub fn oracle_simulate(seeds: &SeedSet, horizon: f64, dt: f64) -> Result<Tessellation> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let pts = seeds.seeds();
    check_general_position(pts)?;
    let n_rays = 2 * pts.len();

    let mut crossings: Vec<Vec<Crossing>> = vec![Vec::new(); n_rays];
    for s in pts {
        for side in Side::BOTH {
            let list = &mut crossings[ray_index(s.id, side)];
            for o in pts.iter().filter(|o| o.mark != s.mark) {
                let dist = side.sign() * (o.position.along(s.mark) - s.position.along(s.mark));
                if dist <= 0.0 || dist > horizon {
                    continue;
                }
                let point = s.position.step(s.mark, side.sign() * dist);
                // the crossing point keeps the exact coordinate of the orthogonal line
                let point = if s.mark == crate::geometry::Direction::Horizontal {
                    Point2::new(o.position.x, point.y)
                } else {
                    Point2::new(point.x, o.position.y)
                };
                let rel = point.along(o.mark) - o.position.along(o.mark);
                let blocker_side = if rel > 0.0 { Side::Plus } else { Side::Minus };
                list.push(Crossing { dist, point, blocker: o.id, blocker_side, offset: rel.abs() });
            }
            list.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.blocker.cmp(&b.blocker)));
        }
    }

    // `None` while growing, `Some(len)` once stopped.
    let mut stopped: Vec<Option<f64>> = vec![None; n_rays];
    let mut stop = vec![Stop::FreeAtHorizon; n_rays];
    let mut cursor = vec![0usize; n_rays];

    let mut k: u64 = 0;
    loop {
        let live: Vec<usize> =
            (0..n_rays).filter(|&r| stopped[r].is_none() && cursor[r] < crossings[r].len()).collect();
        if live.is_empty() {
            break;
        }
        // skip steps in which no live tip reaches a crossing
        let next = live.iter().map(|&r| crossings[r][cursor[r]].dist).fold(f64::INFINITY, f64::min);
        let skip = ((next / dt).floor() as u64).saturating_sub(1);
        k = k.max(skip);
        let t1 = ((k + 1) as f64 * dt).min(horizon);

        // tentative stops within (k·dt, t1]: ray -> (crossing index, time)
        let mut tentative: Vec<Option<(usize, f64)>> = vec![None; n_rays];
        for _ in 0..16 {
            let mut changed = false;
            for &r in &live {
                let mut found = None;
                for (ci, c) in crossings[r].iter().enumerate().skip(cursor[r]) {
                    if c.dist > t1 {
                        break;
                    }
                    let b = ray_index(c.blocker, c.blocker_side);
                    let covered = match (stopped[b], tentative[b]) {
                        (Some(len), _) => len >= c.offset,
                        (None, Some((_, len))) => len >= c.offset && c.offset <= c.dist,
                        (None, None) => c.offset <= c.dist,
                    };
                    if covered {
                        found = Some((ci, c.dist));
                        break;
                    }
                }
                if found != tentative[r] {
                    tentative[r] = found;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        for &r in &live {
            match tentative[r] {
                Some((ci, len)) => {
                    let c = crossings[r][ci];
                    let b = ray_index(c.blocker, c.blocker_side);
                    let blocker_len = stopped[b].or(tentative[b].map(|(_, l)| l)).unwrap_or(c.dist);
                    stopped[r] = Some(len);
                    stop[r] = Stop::Blocked {
                        seed_id: c.blocker,
                        side: c.blocker_side,
                        point: c.point,
                        degenerate: blocker_len == c.offset,
                    };
                }
                None => {
                    while cursor[r] < crossings[r].len() && crossings[r][cursor[r]].dist <= t1 {
                        cursor[r] += 1;
                    }
                }
            }
        }
        if t1 >= horizon {
            break;
        }
        k += 1;
    }

    let rays = (0..n_rays)
        .map(|r| HalfRay {
            seed_id: r / 2,
            side: if r % 2 == 0 { Side::Plus } else { Side::Minus },
            length: stopped[r].unwrap_or(horizon),
            stop: stop[r],
        })
        .collect();
    Ok(Tessellation::from_parts(seeds.clone(), rays, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::geometry::{BoxDomain, Direction};

    fn set(pts: &[(f64, f64, Direction)]) -> SeedSet {
        let pts: Vec<_> = pts.iter().map(|&(x, y, d)| (Point2::new(x, y), d)).collect();
        SeedSet::from_points(BoxDomain::new(4.0).unwrap(), &pts).unwrap()
    }

    #[test]
    fn single_seed_agrees_exactly() {
        let s = set(&[(2.0, 2.0, Direction::Horizontal)]);
        assert_eq!(oracle_simulate(&s, 4.0, 1e-3).unwrap(), simulate(&s, 4.0).unwrap());
    }

    #[test]
    fn two_seed_example_converges() {
        let dt = 1e-3;
        let s = set(&[(1.0, 1.0, Direction::Horizontal), (2.0, 3.0, Direction::Vertical)]);
        let t = oracle_simulate(&s, 4.0, dt).unwrap();
        let down = t.half_ray(1, Side::Minus).unwrap();
        assert!(down.length >= 2.0 - 2.0 * dt && down.length <= 2.0);
        assert_eq!(down.blocker(), Some((0, Side::Plus)));
    }

    #[test]
    fn rejects_bad_step() {
        let s = set(&[]);
        assert!(oracle_simulate(&s, 1.0, 0.0).is_err());
    }
}
