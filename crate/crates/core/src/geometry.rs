//! Planar primitives shared by every other module: axis directions, points,
//! the observation box and the dependence regions of a growing half-ray.
//!
//! A dependence region `D` of a half-ray started at `v` with horizon `t` is
//! the square with one corner at `v` and diagonal `[v, v ± 2t·d]`. Since that
//! diagonal is axis-aligned, `D` is exactly the closed L¹ ball of radius `t`
//! around `v ± t·d`, which becomes an axis-aligned box in the rotated
//! coordinates `(x + y, x − y)`. All predicates below use that representation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Unit vector (1, 0).
    Horizontal,
    /// Unit vector (0, 1).
    Vertical,
}

impl Direction {
    pub fn orthogonal(self) -> Direction {
        match self {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        }
    }

    pub fn unit(self) -> (f64, f64) {
        match self {
            Direction::Horizontal => (1.0, 0.0),
            Direction::Vertical => (0.0, 1.0),
        }
    }

    /// Single-letter code used in CSV files.
    pub fn code(self) -> char {
        match self {
            Direction::Horizontal => 'H',
            Direction::Vertical => 'V',
        }
    }

    pub fn from_code(s: &str) -> Result<Direction> {
        match s {
            "H" => Ok(Direction::Horizontal),
            "V" => Ok(Direction::Vertical),
            other => Err(Error::Parse(format!("unknown mark {other:?}"))),
        }
    }
}

/// Which of the two half-rays of a seed: `Plus` grows along `+d`, `Minus` along `−d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Side::Plus => '+',
            Side::Minus => '-',
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Coordinate along `dir`.
    pub fn along(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Horizontal => self.x,
            Direction::Vertical => self.y,
        }
    }

    /// Coordinate across `dir`, i.e. the constant coordinate of a line with direction `dir`.
    pub fn across(&self, dir: Direction) -> f64 {
        self.along(dir.orthogonal())
    }

    /// `self + s·dir` for the signed step `s`.
    pub fn step(&self, dir: Direction, s: f64) -> Point2 {
        match dir {
            Direction::Horizontal => Point2::new(self.x + s, self.y),
            Direction::Vertical => Point2::new(self.x, self.y + s),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Point2 {
        Point2::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub fn l1_distance(u: Point2, v: Point2) -> f64 {
    (u.x - v.x).abs() + (u.y - v.y).abs()
}

/// The square `[0, side]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    side: f64,
}

impl BoxDomain {
    pub fn new(side: f64) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidParameter(format!("box side must be positive, got {side}")));
        }
        Ok(BoxDomain { side })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, p: Point2) -> bool {
        (0.0..=self.side).contains(&p.x) && (0.0..=self.side).contains(&p.y)
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        self.contains(p) && (p.x == 0.0 || p.y == 0.0 || p.x == self.side || p.y == self.side)
    }

    /// Distance from an interior point to the boundary walking along `dir` with sign of `side`.
    pub fn distance_to_wall(&self, p: Point2, dir: Direction, side: Side) -> f64 {
        let c = p.along(dir);
        match side {
            Side::Plus => self.side - c,
            Side::Minus => c,
        }
    }
}

/// Closed dependence square `D` (and its cone `C`) of the half-ray `(apex, direction, side)`
/// at horizon `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceRegion {
    pub apex: Point2,
    pub direction: Direction,
    pub side: Side,
    pub horizon: f64,
}

impl DependenceRegion {
    pub fn new(apex: Point2, direction: Direction, side: Side, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if !apex.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite apex {apex}")));
        }
        Ok(DependenceRegion { apex, direction, side, horizon })
    }

    /// Centre of the square, `apex ± t·d`; the square is the L¹ ball of radius `t` around it.
    pub fn center(&self) -> Point2 {
        self.apex.step(self.direction, self.side.sign() * self.horizon)
    }

    /// Far corner of the diagonal, `apex ± 2t·d`.
    pub fn far_corner(&self) -> Point2 {
        self.apex.step(self.direction, self.side.sign() * 2.0 * self.horizon)
    }

    pub fn area(&self) -> f64 {
        2.0 * self.horizon * self.horizon
    }

    pub fn cone_area(&self) -> f64 {
        self.horizon * self.horizon
    }

    /// Extents `[u_lo, u_hi] × [w_lo, w_hi]` in the rotated frame `u = x + y`, `w = x − y`.
    pub fn rotated_box(&self) -> [f64; 4] {
        let c = self.center();
        let (u, w) = (c.x + c.y, c.x - c.y);
        let t = self.horizon;
        [u - t, u + t, w - t, w + t]
    }

    pub fn contains(&self, p: Point2) -> bool {
        l1_distance(p, self.center()) <= self.horizon
    }

    pub fn cone_contains(&self, p: Point2) -> bool {
        let along = self.side.sign() * (p.along(self.direction) - self.apex.along(self.direction));
        let across = (p.across(self.direction) - self.apex.across(self.direction)).abs();
        along >= 0.0 && along <= self.horizon && across <= along
    }

    /// Axis-aligned bounding box `(x_lo, x_hi, y_lo, y_hi)` of the square.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let c = self.center();
        let t = self.horizon;
        (c.x - t, c.x + t, c.y - t, c.y + t)
    }
}

/// Closed-set intersection test of two dependence squares with the same horizon.
pub fn regions_intersect(a: &DependenceRegion, b: &DependenceRegion) -> Result<bool> {
    if a.horizon != b.horizon {
        return Err(Error::MismatchedHorizons(a.horizon, b.horizon));
    }
    let [au0, au1, aw0, aw1] = a.rotated_box();
    let [bu0, bu1, bw0, bw1] = b.rotated_box();
    Ok(au0 <= bu1 && bu0 <= au1 && aw0 <= bw1 && bw0 <= aw1)
}

/// Horizon `‖u − v‖₁ / 4` up to which the dependence regions of any half-rays of `u` and `v`
/// are disjoint.
pub fn independence_horizon(u: Point2, v: Point2) -> Result<f64> {
    if u == v {
        return Err(Error::CoincidentPoints(u.x, u.y));
    }
    Ok(l1_distance(u, v) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(x: f64, y: f64, d: Direction, s: Side, t: f64) -> DependenceRegion {
        DependenceRegion::new(Point2::new(x, y), d, s, t).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_distance(Point2::new(0.0, 0.0), Point2::new(0.0, 0.0)), 0.0);
        assert_eq!(l1_distance(Point2::new(1.0, 1.0), Point2::new(2.0, 3.0)), 3.0);
        assert_eq!(l1_distance(Point2::new(-1.0, 2.0), Point2::new(2.0, -2.0)), 7.0);
    }

    #[test]
    fn orthogonal_is_an_involution() {
        for d in [Direction::Horizontal, Direction::Vertical] {
            assert_ne!(d.orthogonal(), d);
            assert_eq!(d.orthogonal().orthogonal(), d);
        }
    }

    #[test]
    fn far_apart_regions_do_not_intersect() {
        let a = region(0.0, 0.0, Direction::Horizontal, Side::Plus, 1.0);
        let b = region(100.0, 100.0, Direction::Horizontal, Side::Plus, 1.0);
        assert!(!regions_intersect(&a, &b).unwrap());
        assert!(regions_intersect(&a, &a).unwrap());
    }

    // Dense membership sampling of the diagonal between the two squares.
    #[test]
    fn touching_regions_intersect_as_closed_sets() {
        let a = region(0.0, 0.0, Direction::Horizontal, Side::Plus, 1.0);
        let b = region(4.0, 0.0, Direction::Horizontal, Side::Minus, 1.0);
        assert_eq!(a.far_corner(), Point2::new(2.0, 0.0));
        assert_eq!(b.far_corner(), Point2::new(2.0, 0.0));
        let mut shared = 0;
        for i in 0..=4000 {
            for j in -20..=20 {
                let p = Point2::new(i as f64 / 1000.0, j as f64 / 1000.0);
                if a.contains(p) && b.contains(p) {
                    shared += 1;
                }
            }
        }
        assert_eq!(shared, 1);
        assert!(regions_intersect(&a, &b).unwrap());
    }

    #[test]
    fn mismatched_horizons_are_rejected() {
        let a = region(0.0, 0.0, Direction::Horizontal, Side::Plus, 1.0);
        let b = region(0.0, 0.0, Direction::Horizontal, Side::Plus, 2.0);
        assert!(matches!(regions_intersect(&a, &b), Err(Error::MismatchedHorizons(..))));
    }

    #[test]
    fn areas_match_extents() {
        let r = region(1.0, -2.0, Direction::Vertical, Side::Minus, 1.5);
        let (x0, x1, y0, y1) = r.bounding_box();
        // a square with diagonal 2t has half the area of its bounding box
        assert_eq!(r.area(), (x1 - x0) * (y1 - y0) / 2.0);
        assert_eq!(r.cone_area(), r.area() / 2.0);
        // cone lies in the square and its centre line is [v, v - t·d]
        for k in 0..=10 {
            let p = r.apex.step(Direction::Vertical, -1.5 * k as f64 / 10.0);
            assert!(r.cone_contains(p));
            assert!(r.contains(p));
        }
        assert!(!r.cone_contains(r.far_corner()));
        assert!(r.contains(r.far_corner()));
    }

    #[test]
    fn independence_horizon_examples() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(independence_horizon(o, Point2::new(4.0, 0.0)).unwrap(), 1.0);
        assert_eq!(independence_horizon(o, Point2::new(2.0, 2.0)).unwrap(), 1.0);
        assert!(independence_horizon(o, o).is_err());
    }

    // Exhaustive grid of relative positions, marks and sides.
    #[test]
    fn regions_are_disjoint_below_the_independence_horizon() {
        let dirs = [Direction::Horizontal, Direction::Vertical];
        let u = Point2::new(0.0, 0.0);
        for i in -12..=12 {
            for j in -12..=12 {
                if i == 0 && j == 0 {
                    continue;
                }
                let v = Point2::new(i as f64 * 0.5, j as f64 * 0.5);
                let h = independence_horizon(u, v).unwrap();
                for du in dirs {
                    for dv in dirs {
                        let mut all_disjoint_below = true;
                        let mut any_disjoint_at = false;
                        for su in Side::BOTH {
                            for sv in Side::BOTH {
                                let below = 0.999 * h;
                                let a = DependenceRegion::new(u, du, su, below).unwrap();
                                let b = DependenceRegion::new(v, dv, sv, below).unwrap();
                                all_disjoint_below &= !regions_intersect(&a, &b).unwrap();
                                let a = DependenceRegion::new(u, du, su, h).unwrap();
                                let b = DependenceRegion::new(v, dv, sv, h).unwrap();
                                any_disjoint_at |= !regions_intersect(&a, &b).unwrap();
                            }
                        }
                        assert!(all_disjoint_below, "u={u} v={v} {du:?} {dv:?}");
                        assert!(any_disjoint_at, "u={u} v={v} {du:?} {dv:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn box_domain() {
        assert!(BoxDomain::new(0.0).is_err());
        assert!(BoxDomain::new(-1.0).is_err());
        let b = BoxDomain::new(4.0).unwrap();
        assert!(b.contains(Point2::new(0.0, 4.0)));
        assert!(!b.contains(Point2::new(4.1, 1.0)));
        assert!(b.on_boundary(Point2::new(4.0, 1.0)));
        assert!(!b.on_boundary(Point2::new(2.0, 1.0)));
    }
}
