//! Companion models on ℤ²: the excitatory/inhibitory cellular automaton and
//! the lattice ray-growth process it reduces to for sparse initial states.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Side};

pub type Cell = (i64, i64);

/// Inclusive integer box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntBox {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl IntBox {
    /// `{0, …, n}²`.
    pub fn square(n: i64) -> Self {
        IntBox { x0: 0, x1: n, y0: 0, y1: n }
    }

    pub fn contains(&self, c: Cell) -> bool {
        (self.x0..=self.x1).contains(&c.0) && (self.y0..=self.y1).contains(&c.1)
    }
}

/// Both coordinates even.
pub fn is_inhibitory(c: Cell) -> bool {
    c.0.rem_euclid(2) == 0 && c.1.rem_euclid(2) == 0
}

const NEIGHBOURS: [Cell; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeState {
    active: BTreeSet<Cell>,
    /// `None` for the whole of ℤ².
    domain: Option<IntBox>,
}

impl LatticeState {
    pub fn new(domain: IntBox, active: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let active: BTreeSet<Cell> = active.into_iter().collect();
        if let Some(c) = active.iter().find(|c| !domain.contains(**c)) {
            return Err(Error::InvalidParameter(format!("active cell {c:?} outside the domain")));
        }
        Ok(LatticeState { active, domain: Some(domain) })
    }

    pub fn unbounded(active: impl IntoIterator<Item = Cell>) -> Self {
        LatticeState { active: active.into_iter().collect(), domain: None }
    }

    pub fn active(&self) -> &BTreeSet<Cell> {
        &self.active
    }

    pub fn domain(&self) -> Option<IntBox> {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    fn in_domain(&self, c: Cell) -> bool {
        self.domain.is_none_or(|d| d.contains(c))
    }

    pub fn translated(&self, dx: i64, dy: i64) -> LatticeState {
        LatticeState {
            active: self.active.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
            domain: self.domain.map(|d| IntBox { x0: d.x0 + dx, x1: d.x1 + dx, y0: d.y0 + dy, y1: d.y1 + dy }),
        }
    }

    /// Plain-text grid, `#` active and `.` inactive, highest row first. Needs a bounded domain.
    pub fn to_grid_text(&self) -> Result<String> {
        let d = self.domain.ok_or_else(|| Error::InvalidParameter("grid output needs a bounded domain".into()))?;
        let mut out = String::new();
        for y in (d.y0..=d.y1).rev() {
            for x in d.x0..=d.x1 {
                out.push(if self.active.contains(&(x, y)) { '#' } else { '.' });
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Inverse of [`LatticeState::to_grid_text`]; the lower-left character sits at `origin`.
    pub fn from_grid_text(text: &str, origin: Cell) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.chars().count());
        if rows.is_empty() || rows.iter().any(|r| r.chars().count() != width) {
            return Err(Error::Parse("grid rows must be non-empty and of equal width".into()));
        }
        let h = rows.len() as i64;
        let mut active = BTreeSet::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '#' => {
                        active.insert((origin.0 + c as i64, origin.1 + h - 1 - r as i64));
                    }
                    '.' => {}
                    other => return Err(Error::Parse(format!("unexpected grid character {other:?}"))),
                }
            }
        }
        let domain = IntBox { x0: origin.0, x1: origin.0 + width as i64 - 1, y0: origin.1, y1: origin.1 + h - 1 };
        Ok(LatticeState { active, domain: Some(domain) })
    }
}

/// One synchronous update: a cell becomes active iff its active excitatory neighbours outnumber
/// its active inhibitory neighbours by at least one. Neighbourhoods are clipped to the domain.
pub fn ca_step(state: &LatticeState) -> LatticeState {
    let mut score: HashMap<Cell, i32> = HashMap::new();
    for &a in &state.active {
        let w = if is_inhibitory(a) { -1 } else { 1 };
        for (dx, dy) in NEIGHBOURS {
            let v = (a.0 + dx, a.1 + dy);
            if state.in_domain(v) {
                *score.entry(v).or_insert(0) += w;
            }
        }
    }
    LatticeState { active: score.into_iter().filter(|&(_, s)| s >= 1).map(|(c, _)| c).collect(), domain: state.domain }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// First step of the repeating segment.
    pub start: usize,
    pub period: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<LatticeState>,
    pub cycle: Option<Cycle>,
}

impl Trajectory {
    pub fn sizes(&self) -> Vec<usize> {
        self.states.iter().map(LatticeState::len).collect()
    }

    pub fn sizes_csv(&self) -> String {
        let mut out = String::from("t,active\n");
        for (t, s) in self.sizes().iter().enumerate() {
            let _ = writeln!(out, "{t},{s}");
        }
        out
    }
}

pub const DEFAULT_CYCLE_WINDOW: usize = 64;

/// Iterates [`ca_step`] `steps` times, recording the first revisit of any of the last `window` states.
pub fn ca_run(initial: &LatticeState, steps: usize, window: usize) -> Trajectory {
    let mut states = vec![initial.clone()];
    let mut cycle = None;
    for _ in 0..steps {
        let next = ca_step(states.last().unwrap());
        if cycle.is_none() {
            let lo = states.len().saturating_sub(window);
            if let Some(i) = (lo..states.len()).rev().find(|&i| states[i] == next) {
                cycle = Some(Cycle { start: i, period: states.len() - i });
            }
        }
        states.push(next);
    }
    Trajectory { states, cycle }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LatticeStop {
    /// Tip met the interior of an orthogonal trace.
    TJunction,
    /// Tip met the end of an orthogonal trace, or an orthogonal tip arriving at the same time.
    Corner,
    /// Tip met a collinear ray.
    HeadOn,
    FreeAtHorizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeRayConfig {
    n: i64,
    seeds: Vec<(Cell, Direction)>,
}

impl LatticeRayConfig {
    /// Seeds must be distinct points of `{1, …, n−1}²` with `n > 2`.
    pub fn new(n: i64, seeds: Vec<(Cell, Direction)>) -> Result<Self> {
        if n <= 2 {
            return Err(Error::InvalidParameter(format!("lattice box side must exceed 2, got {n}")));
        }
        let mut seen = BTreeSet::new();
        for &(c, _) in &seeds {
            if !(1..n).contains(&c.0) || !(1..n).contains(&c.1) {
                return Err(Error::InvalidParameter(format!("seed {c:?} outside {{1..{}}}²", n - 1)));
            }
            if !seen.insert(c) {
                return Err(Error::Degenerate(format!("seed {c:?} given twice")));
            }
        }
        Ok(LatticeRayConfig { n, seeds })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn seeds(&self) -> &[(Cell, Direction)] {
        &self.seeds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeRay {
    pub seed: usize,
    pub side: Side,
    /// Length in half edges.
    pub half_steps: u64,
    pub stop: LatticeStop,
    pub blocker: Option<(usize, Side)>,
    /// Half-step at which growth stopped.
    pub stopped_at: Option<u64>,
}

impl LatticeRay {
    pub fn length(&self) -> f64 {
        self.half_steps as f64 / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct LatticeRays {
    pub config: LatticeRayConfig,
    pub horizon: u64,
    pub rays: Vec<LatticeRay>,
}

fn unit2(d: Direction, side: Side) -> Cell {
    let s = if side == Side::Plus { 1 } else { -1 };
    match d {
        Direction::Horizontal => (s, 0),
        Direction::Vertical => (0, s),
    }
}

impl LatticeRays {
    /// Tip of a ray in doubled coordinates.
    pub fn tip2(&self, ray: usize) -> Cell {
        let r = &self.rays[ray];
        let ((x, y), d) = self.config.seeds[r.seed];
        let u = unit2(d, r.side);
        let h = r.half_steps as i64;
        (2 * x + u.0 * h, 2 * y + u.1 * h)
    }

    /// All covered points at half-integer resolution, in doubled coordinates.
    pub fn trace2(&self) -> BTreeSet<Cell> {
        let mut out = BTreeSet::new();
        for r in &self.rays {
            let ((x, y), d) = self.config.seeds[r.seed];
            let u = unit2(d, r.side);
            for k in 0..=r.half_steps as i64 {
                out.insert((2 * x + u.0 * k, 2 * y + u.1 * k));
            }
        }
        out
    }

    /// Trace restricted to `[0, n]²`, doubled coordinates.
    pub fn trace_in_box(&self) -> BTreeSet<Cell> {
        let m = 2 * self.config.n;
        self.trace2().into_iter().filter(|&(x, y)| (0..=m).contains(&x) && (0..=m).contains(&y)).collect()
    }

    /// Lattice points (integer coordinates) covered by the trace inside the box.
    pub fn lattice_points_in_box(&self) -> BTreeSet<Cell> {
        self.trace_in_box()
            .into_iter()
            .filter(|&(x, y)| x % 2 == 0 && y % 2 == 0)
            .map(|(x, y)| (x / 2, y / 2))
            .collect()
    }
}

/// Grows all rays for `horizon` time units in half-unit steps.
pub fn lattice_ray_simulate(config: &LatticeRayConfig, horizon: u64) -> LatticeRays {
    let seeds = &config.seeds;
    let n_rays = 2 * seeds.len();
    let side_of = |r: usize| if r.is_multiple_of(2) { Side::Plus } else { Side::Minus };

    let mut cover: HashMap<Cell, Vec<usize>> = HashMap::new();
    let mut tips: Vec<Cell> = Vec::with_capacity(n_rays);
    for (i, &((x, y), _)) in seeds.iter().enumerate() {
        cover.entry((2 * x, 2 * y)).or_default().extend([2 * i, 2 * i + 1]);
        tips.extend([(2 * x, 2 * y), (2 * x, 2 * y)]);
    }
    let mut rays: Vec<LatticeRay> = (0..n_rays)
        .map(|r| LatticeRay {
            seed: r / 2,
            side: side_of(r),
            half_steps: 0,
            stop: LatticeStop::FreeAtHorizon,
            blocker: None,
            stopped_at: None,
        })
        .collect();

    for step in 1..=2 * horizon {
        let alive: Vec<usize> = (0..n_rays).filter(|&r| rays[r].stopped_at.is_none()).collect();
        if alive.is_empty() {
            break;
        }
        let mut target: HashMap<Cell, Vec<usize>> = HashMap::new();
        let proposals: Vec<(usize, Cell)> = alive
            .iter()
            .map(|&r| {
                let u = unit2(seeds[r / 2].1, side_of(r));
                let p = (tips[r].0 + u.0, tips[r].1 + u.1);
                target.entry(p).or_default().push(r);
                (r, p)
            })
            .collect();

        let mut decisions = Vec::new();
        for &(r, p) in &proposals {
            let seed = r / 2;
            let mark = seeds[seed].1;
            let existing: Vec<usize> =
                cover.get(&p).map_or(Vec::new(), |v| v.iter().copied().filter(|&q| q / 2 != seed).collect());
            let arriving: Vec<usize> = target[&p].iter().copied().filter(|&q| q / 2 != seed).collect();
            if existing.is_empty() && arriving.is_empty() {
                continue;
            }
            let collinear = existing.iter().chain(&arriving).find(|&&q| seeds[q / 2].1 == mark);
            let (stop, blocker) = if let Some(&q) = collinear {
                (LatticeStop::HeadOn, q)
            } else if let Some(&q) = arriving.first() {
                (LatticeStop::Corner, q)
            } else {
                // orthogonal trace: an end point of the other seed's segment is a corner
                let q = existing[0];
                let other = q / 2;
                let at_end = tips[2 * other] == p || tips[2 * other + 1] == p;
                (if at_end { LatticeStop::Corner } else { LatticeStop::TJunction }, q)
            };
            decisions.push((r, stop, blocker));
        }

        for &(r, p) in &proposals {
            tips[r] = p;
            rays[r].half_steps += 1;
            cover.entry(p).or_default().push(r);
        }
        for (r, stop, q) in decisions {
            rays[r].stop = stop;
            rays[r].blocker = Some((q / 2, side_of(q)));
            rays[r].stopped_at = Some(step);
        }
    }
    LatticeRays { config: config.clone(), horizon, rays }
}

/// Side-by-side sizes of the automaton started from the seed set and of the lattice points
/// covered by the ray traces at integer times. No equivalence is implied.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub t: u64,
    pub ca_active: usize,
    pub ray_points: usize,
    pub shared: usize,
}

pub fn compare_ca_with_rays(config: &LatticeRayConfig, steps: u64) -> Vec<ComparisonRow> {
    let domain = IntBox::square(config.n);
    let initial = LatticeState { active: config.seeds.iter().map(|&(c, _)| c).collect(), domain: Some(domain) };
    let traj = ca_run(&initial, steps as usize, DEFAULT_CYCLE_WINDOW);
    (0..=steps)
        .map(|t| {
            let rays = lattice_ray_simulate(config, t).lattice_points_in_box();
            let ca = traj.states[t as usize].active();
            ComparisonRow { t, ca_active: ca.len(), ray_points: rays.len(), shared: ca.intersection(&rays).count() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::{Horizontal as H, Vertical as V};

    #[test]
    fn empty_stays_empty() {
        assert!(ca_step(&LatticeState::unbounded([])).is_empty());
    }

    #[test]
    fn excitatory_singleton_spreads_to_its_neighbours() {
        assert!(!is_inhibitory((5, 5)));
        let next = ca_step(&LatticeState::unbounded([(5, 5)]));
        let want: BTreeSet<Cell> = [(4, 5), (6, 5), (5, 4), (5, 6)].into_iter().collect();
        assert_eq!(next.active(), &want);
    }

    #[test]
    fn inhibitory_singleton_dies() {
        assert!(is_inhibitory((4, 4)));
        assert!(ca_step(&LatticeState::unbounded([(4, 4)])).is_empty());
    }

    #[test]
    fn neighbourhoods_are_clipped_to_the_domain() {
        let s = LatticeState::new(IntBox::square(5), [(5, 5)]).unwrap();
        let want: BTreeSet<Cell> = [(4, 5), (5, 4)].into_iter().collect();
        assert_eq!(ca_step(&s).active(), &want);
        assert!(LatticeState::new(IntBox::square(3), [(4, 0)]).is_err());
    }

    #[test]
    fn run_records_sizes_and_non_monotonicity() {
        let s = LatticeState::unbounded([(5, 5)]);
        let traj = ca_run(&s, 0, DEFAULT_CYCLE_WINDOW);
        assert_eq!(traj.states, vec![s.clone()]);
        let traj = ca_run(&s, 1, DEFAULT_CYCLE_WINDOW);
        assert_eq!(traj.sizes(), vec![1, 4]);
        let dying = ca_run(&LatticeState::unbounded([(4, 4)]), 1, DEFAULT_CYCLE_WINDOW);
        assert!(dying.sizes()[1] < dying.sizes()[0]);
    }

    #[test]
    fn cycle_detection_on_a_dead_state() {
        let traj = ca_run(&LatticeState::unbounded([(4, 4)]), 5, DEFAULT_CYCLE_WINDOW);
        assert_eq!(traj.cycle, Some(Cycle { start: 1, period: 1 }));
        assert_eq!(traj.sizes_csv().lines().next(), Some("t,active"));
    }

    #[test]
    fn grid_text_round_trip() {
        let s = LatticeState::new(IntBox::square(3), [(0, 0), (1, 2), (3, 3)]).unwrap();
        let text = s.to_grid_text().unwrap();
        assert_eq!(text, "...#\n.#..\n....\n#...\n");
        assert_eq!(LatticeState::from_grid_text(&text, (0, 0)).unwrap(), s);
    }

    #[test]
    fn even_translation_equivariance() {
        let s = LatticeState::unbounded([(3, 3), (4, 3), (6, 6), (7, 8)]);
        assert_eq!(ca_step(&s.translated(2, 2)), ca_step(&s).translated(2, 2));
    }

    #[test]
    fn single_seed_is_free() {
        let cfg = LatticeRayConfig::new(6, vec![((3, 3), V)]).unwrap();
        let out = lattice_ray_simulate(&cfg, 6);
        for r in &out.rays {
            assert_eq!(r.stop, LatticeStop::FreeAtHorizon);
            assert_eq!(r.half_steps, 12);
        }
    }

    #[test]
    fn head_on_collision() {
        let cfg = LatticeRayConfig::new(6, vec![((1, 3), H), ((5, 3), H)]).unwrap();
        let out = lattice_ray_simulate(&cfg, 6);
        let (a, b) = (&out.rays[0], &out.rays[3]);
        assert_eq!((a.stop, b.stop), (LatticeStop::HeadOn, LatticeStop::HeadOn));
        assert_eq!((a.length(), b.length()), (2.0, 2.0));
        assert_eq!(out.tip2(0), (6, 6));
        assert_eq!(a.stopped_at, Some(4));
    }

    #[test]
    fn t_junction() {
        let cfg = LatticeRayConfig::new(5, vec![((1, 1), H), ((2, 3), V)]).unwrap();
        let out = lattice_ray_simulate(&cfg, 5);
        let down = &out.rays[3];
        assert_eq!(down.stop, LatticeStop::TJunction);
        assert_eq!(down.length(), 2.0);
        assert_eq!(out.tip2(3), (4, 2));
        assert_eq!(down.blocker, Some((0, Side::Plus)));
    }

    #[test]
    fn simultaneous_orthogonal_arrival_is_a_corner() {
        // (1,2)+ and (2,1)+ both reach (2,2) at t = 1
        let cfg = LatticeRayConfig::new(5, vec![((1, 2), H), ((2, 1), V)]).unwrap();
        let out = lattice_ray_simulate(&cfg, 5);
        assert_eq!(out.rays[0].stop, LatticeStop::Corner);
        assert_eq!(out.rays[2].stop, LatticeStop::Corner);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(LatticeRayConfig::new(2, vec![]).is_err());
        assert!(LatticeRayConfig::new(5, vec![((0, 2), H)]).is_err());
        assert!(LatticeRayConfig::new(5, vec![((5, 2), H)]).is_err());
        assert!(LatticeRayConfig::new(5, vec![((2, 2), H), ((2, 2), V)]).is_err());
    }

    #[test]
    fn before_the_first_unit_the_trace_is_the_union_of_short_segments() {
        let cfg = LatticeRayConfig::new(8, vec![((2, 2), H), ((5, 6), V)]).unwrap();
        let out = lattice_ray_simulate(&cfg, 0);
        assert_eq!(out.trace2().len(), 2);
        // half a unit later each seed carries a segment of length 2·(1/2)
        let mut rays = lattice_ray_simulate(&cfg, 1);
        rays.rays.iter_mut().for_each(|r| r.half_steps = r.half_steps.min(1));
        let want: BTreeSet<Cell> = [(3, 4), (4, 4), (5, 4), (10, 11), (10, 12), (10, 13)].into_iter().collect();
        assert_eq!(rays.trace2(), want);
    }
}
