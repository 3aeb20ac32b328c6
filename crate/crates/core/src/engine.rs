//! Exact event-driven resolution of the growth dynamics.
//!
//! Every seed grows two half-rays at unit speed along its mark until a tip
//! touches another segment. Because all segments are axis-aligned, a
//! horizontal tip can only be stopped where it crosses the line of a
//! vertical seed, and vice versa; the arrival time at such a crossing is
//! simply the axis distance to that line. A crossing at distance `τ` whose
//! point sits at offset `δ` from the orthogonal seed is only a candidate
//! when `δ ≤ τ` (otherwise the orthogonal tip cannot be there yet), which is
//! the cone of the half-ray.
//!
//! The engine keeps one pending candidate per growing half-ray in a min-heap
//! keyed by `(time, seed id, side)`. When a candidate is popped, the
//! crossing point blocks the tip iff the orthogonal half-ray on that side is
//! still growing (then its length is the current time, at least `δ`) or has
//! already stopped with length at least `δ`. Events are processed in time
//! order, so every stop that happened earlier is final by then. Rejected
//! candidates advance the half-ray's cursor to its next crossing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, Direction, Point2, Side};
use crate::sampling::{check_general_position, SeedPoint, SeedSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Tip stopped on the half-ray `(seed_id, side)` at `point`. `degenerate` marks a
    /// measure-zero contact: a simultaneous tip-to-tip arrival or a graze of the blocker's endpoint.
    Blocked { seed_id: usize, side: Side, point: Point2, degenerate: bool },
    /// Still growing when the horizon was reached.
    FreeAtHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfRay {
    pub seed_id: usize,
    pub side: Side,
    /// Final length; equals the horizon for a free half-ray.
    pub length: f64,
    pub stop: Stop,
}

impl HalfRay {
    pub fn censored(&self) -> bool {
        matches!(self.stop, Stop::FreeAtHorizon)
    }

    pub fn blocker(&self) -> Option<(usize, Side)> {
        match self.stop {
            Stop::Blocked { seed_id, side, .. } => Some((seed_id, side)),
            Stop::FreeAtHorizon => None,
        }
    }
}

/// Index of a half-ray in flat per-ray arrays.
#[inline]
pub fn ray_index(seed_id: usize, side: Side) -> usize {
    2 * seed_id + side.index()
}

#[inline]
fn side_of(index: usize) -> Side {
    if index.is_multiple_of(2) {
        Side::Plus
    } else {
        Side::Minus
    }
}

/// Total length of a seed's segment at the horizon, with censoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayLength {
    pub total: f64,
    /// At least one half-ray was still growing at the horizon.
    pub censored: bool,
}

/// Final configuration of all half-rays.
#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    seeds: SeedSet,
    rays: Vec<HalfRay>,
    horizon: f64,
}

impl Tessellation {
    pub(crate) fn from_parts(seeds: SeedSet, rays: Vec<HalfRay>, horizon: f64) -> Self {
        Tessellation { seeds, rays, horizon }
    }

    pub fn seeds(&self) -> &SeedSet {
        &self.seeds
    }

    pub fn domain(&self) -> BoxDomain {
        self.seeds.domain()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn half_rays(&self) -> &[HalfRay] {
        &self.rays
    }

    pub fn half_ray(&self, seed_id: usize, side: Side) -> Result<&HalfRay> {
        self.rays.get(ray_index(seed_id, side)).ok_or(Error::UnknownSeed(seed_id))
    }

    /// Far end of a half-ray. Blocked tips reuse the stored crossing point, whose
    /// coordinates are copies of seed coordinates.
    pub fn tip(&self, seed_id: usize, side: Side) -> Result<Point2> {
        let ray = self.half_ray(seed_id, side)?;
        let seed = &self.seeds.seeds()[seed_id];
        Ok(match ray.stop {
            Stop::Blocked { point, .. } => point,
            Stop::FreeAtHorizon => seed.position.step(seed.mark, side.sign() * ray.length),
        })
    }

    /// Whole segment of a seed as `(minus tip, plus tip)`.
    pub fn segment(&self, seed_id: usize) -> Result<(Point2, Point2)> {
        Ok((self.tip(seed_id, Side::Minus)?, self.tip(seed_id, Side::Plus)?))
    }

    pub fn ray_length_total(&self, seed_id: usize) -> Result<RayLength> {
        let plus = self.half_ray(seed_id, Side::Plus)?;
        let minus = self.half_ray(seed_id, Side::Minus)?;
        Ok(RayLength { total: plus.length + minus.length, censored: plus.censored() || minus.censored() })
    }

    /// Number of half-rays whose closed segment meets the boundary of the box.
    pub fn escaping_rays(&self) -> Result<usize> {
        let domain = self.domain();
        if self.horizon < domain.side() {
            return Err(Error::NotFrozen { horizon: self.horizon, side: domain.side() });
        }
        let mut count = 0;
        for ray in &self.rays {
            let origin = self.seeds.seeds()[ray.seed_id].position;
            let tip = self.tip(ray.seed_id, ray.side)?;
            if segment_meets_boundary(origin, tip, domain) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// CSV with one row per seed: `seed_id,x,y,mark,len_plus,stop_plus,len_minus,stop_minus`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed_id,x,y,mark,len_plus,stop_plus,len_minus,stop_minus\n");
        for s in self.seeds.seeds() {
            let p = &self.rays[ray_index(s.id, Side::Plus)];
            let m = &self.rays[ray_index(s.id, Side::Minus)];
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.id,
                s.position.x,
                s.position.y,
                s.mark.code(),
                p.length,
                stop_code(&p.stop),
                m.length,
                stop_code(&m.stop)
            );
        }
        out
    }
}

fn stop_code(stop: &Stop) -> String {
    match stop {
        Stop::FreeAtHorizon => "free".to_string(),
        Stop::Blocked { seed_id, side, .. } => format!("blocked:{seed_id}{}", side.symbol()),
    }
}

/// Closed axis-aligned segment `[a, b]` against the boundary of `[0, N]²`.
pub fn segment_meets_boundary(a: Point2, b: Point2, domain: BoxDomain) -> bool {
    let n = domain.side();
    let hits = |fixed: f64, lo: f64, hi: f64| {
        if !(0.0..=n).contains(&fixed) {
            return false;
        }
        if fixed == 0.0 || fixed == n {
            return lo <= n && hi >= 0.0;
        }
        (lo <= 0.0 && 0.0 <= hi) || (lo <= n && n <= hi)
    };
    if a.y == b.y {
        hits(a.y, a.x.min(b.x), a.x.max(b.x))
    } else {
        hits(a.x, a.y.min(b.y), a.y.max(b.y))
    }
}

/// Seeds of one mark sorted by the coordinate a crossing ray travels along.
struct CrossIndex {
    along: Vec<f64>,
    across: Vec<f64>,
    ids: Vec<usize>,
}

impl CrossIndex {
    /// Lines that rays of direction `ray_dir` can cross: seeds with the orthogonal mark.
    fn build(seeds: &[SeedPoint], ray_dir: Direction) -> Self {
        let mut lines: Vec<(f64, f64, usize)> = seeds
            .iter()
            .filter(|s| s.mark == ray_dir.orthogonal())
            .map(|s| (s.position.along(ray_dir), s.position.across(ray_dir), s.id))
            .collect();
        lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        CrossIndex {
            along: lines.iter().map(|l| l.0).collect(),
            across: lines.iter().map(|l| l.1).collect(),
            ids: lines.iter().map(|l| l.2).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    ray: usize,
    line: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that `BinaryHeap` pops the earliest event; ties by seed id then side.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.ray.cmp(&self.ray))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RayState {
    Growing,
    Stopped(f64),
}

struct Engine<'a> {
    seeds: &'a [SeedPoint],
    horizon: f64,
    // indexed by ray direction: [Horizontal, Vertical]
    index: [CrossIndex; 2],
    cursor: Vec<isize>,
    state: Vec<RayState>,
    stop: Vec<Stop>,
    heap: BinaryHeap<Event>,
}

fn dir_slot(d: Direction) -> usize {
    match d {
        Direction::Horizontal => 0,
        Direction::Vertical => 1,
    }
}

impl<'a> Engine<'a> {
    fn new(seeds: &'a [SeedPoint], horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        check_general_position(seeds)?;
        let index = [CrossIndex::build(seeds, Direction::Horizontal), CrossIndex::build(seeds, Direction::Vertical)];
        let n = seeds.len();
        let mut engine = Engine {
            seeds,
            horizon,
            index,
            cursor: vec![0; 2 * n],
            state: vec![RayState::Growing; 2 * n],
            stop: vec![Stop::FreeAtHorizon; 2 * n],
            heap: BinaryHeap::with_capacity(2 * n),
        };
        for s in seeds {
            let idx = &engine.index[dir_slot(s.mark)];
            let start = idx.along.partition_point(|&a| a < s.position.along(s.mark)) as isize;
            engine.cursor[ray_index(s.id, Side::Plus)] = start;
            engine.cursor[ray_index(s.id, Side::Minus)] = start - 1;
        }
        for ray in 0..2 * n {
            engine.schedule(ray);
        }
        Ok(engine)
    }

    /// Pushes the next crossing of `ray` that lies in its cone and before the horizon.
    fn schedule(&mut self, ray: usize) {
        let seed = &self.seeds[ray / 2];
        let side = side_of(ray);
        let idx = &self.index[dir_slot(seed.mark)];
        let a0 = seed.position.along(seed.mark);
        let c0 = seed.position.across(seed.mark);
        let sign = side.sign();
        let step: isize = if side == Side::Plus { 1 } else { -1 };
        let mut k = self.cursor[ray];
        while k >= 0 && (k as usize) < idx.along.len() {
            let i = k as usize;
            let dist = sign * (idx.along[i] - a0);
            if dist > self.horizon {
                break;
            }
            k += step;
            if (idx.across[i] - c0).abs() <= dist {
                self.cursor[ray] = k;
                self.heap.push(Event { time: dist, ray, line: i });
                return;
            }
        }
        self.cursor[ray] = k;
    }

    fn process(&mut self, ev: Event) {
        if self.state[ev.ray] != RayState::Growing {
            return;
        }
        let seed = &self.seeds[ev.ray / 2];
        let idx = &self.index[dir_slot(seed.mark)];
        let c0 = seed.position.across(seed.mark);
        let blocker_id = idx.ids[ev.line];
        let offset = c0 - idx.across[ev.line];
        let blocker_side = if offset > 0.0 { Side::Plus } else { Side::Minus };
        let delta = offset.abs();
        let (covered, graze) = match self.state[ray_index(blocker_id, blocker_side)] {
            RayState::Growing => (true, delta == ev.time),
            RayState::Stopped(len) => (len >= delta, len == delta),
        };
        if covered {
            let point = match seed.mark {
                Direction::Horizontal => Point2::new(idx.along[ev.line], c0),
                Direction::Vertical => Point2::new(c0, idx.along[ev.line]),
            };
            self.state[ev.ray] = RayState::Stopped(ev.time);
            self.stop[ev.ray] = Stop::Blocked { seed_id: blocker_id, side: blocker_side, point, degenerate: graze };
        } else {
            self.schedule(ev.ray);
        }
    }

    fn run(&mut self) {
        while let Some(ev) = self.heap.pop() {
            self.process(ev);
        }
    }

    /// Runs until every listed half-ray has stopped or no events remain.
    fn run_until_resolved(&mut self, targets: &[usize]) {
        while targets.iter().any(|&r| self.state[r] == RayState::Growing) {
            match self.heap.pop() {
                Some(ev) => self.process(ev),
                None => break,
            }
        }
    }

    fn half_ray(&self, ray: usize) -> HalfRay {
        let length = match self.state[ray] {
            RayState::Stopped(len) => len,
            RayState::Growing => self.horizon,
        };
        HalfRay { seed_id: ray / 2, side: side_of(ray), length, stop: self.stop[ray] }
    }
}

/// Grows every half-ray up to `horizon` and returns exact final lengths and stop causes.
pub fn simulate(seeds: &SeedSet, horizon: f64) -> Result<Tessellation> {
    let mut engine = Engine::new(seeds.seeds(), horizon)?;
    engine.run();
    let rays = (0..2 * seeds.len()).map(|r| engine.half_ray(r)).collect();
    Ok(Tessellation::from_parts(seeds.clone(), rays, horizon))
}

/// Resolves only the listed half-rays, stopping the event loop as soon as all of them
/// are decided. Agrees with [`simulate`] on those half-rays.
pub fn resolve_half_rays(seeds: &SeedSet, horizon: f64, targets: &[(usize, Side)]) -> Result<Vec<HalfRay>> {
    let ids: Vec<usize> = targets
        .iter()
        .map(|&(id, side)| if id < seeds.len() { Ok(ray_index(id, side)) } else { Err(Error::UnknownSeed(id)) })
        .collect::<Result<_>>()?;
    let mut engine = Engine::new(seeds.seeds(), horizon)?;
    engine.run_until_resolved(&ids);
    Ok(ids.iter().map(|&r| engine.half_ray(r)).collect())
}
