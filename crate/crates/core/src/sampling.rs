//! Marked Poisson seed sets and Palm insertion of fixed points.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, Direction, Point2};
use crate::rng::stream_rng;

/// Law of the direction mark: vertical with probability `p_vertical`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkDistribution {
    p_vertical: f64,
}

impl MarkDistribution {
    pub fn new(p_vertical: f64) -> Result<Self> {
        if !(p_vertical > 0.0 && p_vertical < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "vertical mark probability must lie in (0, 1), got {p_vertical}"
            )));
        }
        Ok(MarkDistribution { p_vertical })
    }

    pub fn p_vertical(&self) -> f64 {
        self.p_vertical
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        if rng.random::<f64>() < self.p_vertical {
            Direction::Vertical
        } else {
            Direction::Horizontal
        }
    }
}

impl Default for MarkDistribution {
    fn default() -> Self {
        MarkDistribution { p_vertical: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedPoint {
    pub id: usize,
    pub position: Point2,
    pub mark: Direction,
    /// Inserted by Palm conditioning rather than sampled.
    pub pinned: bool,
}

/// How degenerate (coordinate-sharing) inputs are treated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PositionPolicy {
    /// Reject any two seeds sharing an x- or a y-coordinate.
    #[default]
    Strict,
    /// Perturb every coordinate by `uniform(−epsilon, epsilon)` first.
    Jitter { epsilon: f64, rng_seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    seeds: Vec<SeedPoint>,
    domain: BoxDomain,
    /// Intensity of the background process; `0.0` for hand-built sets.
    intensity: f64,
    rng_seed: u64,
}

/// Errors naming the first pair of seeds that share a coordinate.
pub fn check_general_position(seeds: &[SeedPoint]) -> Result<()> {
    for (axis, coord) in [("x", 0usize), ("y", 1usize)] {
        let mut keyed: Vec<(f64, usize)> =
            seeds.iter().map(|s| (if coord == 0 { s.position.x } else { s.position.y }, s.id)).collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Degenerate(format!("seeds {} and {} share {axis} = {}", w[0].1, w[1].1, w[0].0)));
        }
    }
    Ok(())
}

impl SeedSet {
    /// Hand-built set with sequential ids. Positions must lie in the box and be in general position.
    pub fn from_points(domain: BoxDomain, points: &[(Point2, Direction)]) -> Result<Self> {
        let set = SeedSet { seeds: Vec::new(), domain, intensity: 0.0, rng_seed: 0 };
        set.insert_palm(points)
    }

    /// Background set from sampled points; ids are renumbered and general position is checked.
    pub fn from_background(domain: BoxDomain, points: Vec<SeedPoint>, intensity: f64, rng_seed: u64) -> Result<Self> {
        let seeds: Vec<SeedPoint> =
            points.into_iter().enumerate().map(|(id, s)| SeedPoint { id, pinned: false, ..s }).collect();
        check_general_position(&seeds)?;
        Ok(SeedSet { seeds, domain, intensity, rng_seed })
    }

    pub fn empty(domain: BoxDomain) -> Self {
        SeedSet { seeds: Vec::new(), domain, intensity: 0.0, rng_seed: 0 }
    }

    pub fn seeds(&self) -> &[SeedPoint] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn domain(&self) -> BoxDomain {
        self.domain
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn get(&self, id: usize) -> Option<&SeedPoint> {
        self.seeds.get(id)
    }

    pub fn background(&self) -> impl Iterator<Item = &SeedPoint> {
        self.seeds.iter().filter(|s| !s.pinned)
    }

    pub fn pinned(&self) -> impl Iterator<Item = &SeedPoint> {
        self.seeds.iter().filter(|s| s.pinned)
    }

    /// Keeps pinned seeds and the background seeds satisfying `keep`; ids are renumbered in order.
    pub fn retain_background<F: Fn(Point2) -> bool>(&self, keep: F) -> SeedSet {
        let seeds = self
            .seeds
            .iter()
            .filter(|s| s.pinned || keep(s.position))
            .enumerate()
            .map(|(id, s)| SeedPoint { id, ..*s })
            .collect();
        SeedSet { seeds, ..*self }
    }

    /// Appends pinned seeds, realizing the conditioning on `{u ∈ 𝓥 for each inserted u}`.
    pub fn insert_palm(&self, points: &[(Point2, Direction)]) -> Result<SeedSet> {
        let mut seeds = self.seeds.clone();
        for &(position, mark) in points {
            if !position.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite seed position {position}")));
            }
            if !self.domain.contains(position) {
                return Err(Error::InvalidParameter(format!(
                    "seed {position} lies outside [0, {}]²",
                    self.domain.side()
                )));
            }
            if let Some(dup) = seeds.iter().find(|s| s.position == position) {
                return Err(Error::Degenerate(format!("position {position} already holds seed {}", dup.id)));
            }
            seeds.push(SeedPoint { id: seeds.len(), position, mark, pinned: true });
        }
        check_general_position(&seeds)?;
        Ok(SeedSet { seeds, ..*self })
    }

    /// Copy with every coordinate perturbed by `uniform(−epsilon, epsilon)` and clamped to the box.
    pub fn jittered(&self, epsilon: f64, rng_seed: u64) -> Result<SeedSet> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("jitter must be positive, got {epsilon}")));
        }
        let mut rng = stream_rng(rng_seed, 0, "jitter");
        let n = self.domain.side();
        let seeds: Vec<SeedPoint> = self
            .seeds
            .iter()
            .map(|s| {
                let dx = rng.random_range(-epsilon..epsilon);
                let dy = rng.random_range(-epsilon..epsilon);
                let position = Point2::new((s.position.x + dx).clamp(0.0, n), (s.position.y + dy).clamp(0.0, n));
                SeedPoint { position, ..*s }
            })
            .collect();
        check_general_position(&seeds)?;
        Ok(SeedSet { seeds, ..*self })
    }

    /// Applies `policy`: validates in strict mode, perturbs in jitter mode.
    pub fn with_policy(&self, policy: PositionPolicy) -> Result<SeedSet> {
        match policy {
            PositionPolicy::Strict => {
                check_general_position(&self.seeds)?;
                Ok(self.clone())
            }
            PositionPolicy::Jitter { epsilon, rng_seed } => self.jittered(epsilon, rng_seed),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,x,y,mark,pinned\n");
        for s in &self.seeds {
            let _ = writeln!(out, "{},{},{},{},{}", s.id, s.position.x, s.position.y, s.mark.code(), s.pinned as u8);
        }
        out
    }

    /// Parses the CSV written by [`SeedSet::to_csv`]. Ids must be `0..n` in order.
    pub fn from_csv(domain: BoxDomain, text: &str) -> Result<SeedSet> {
        let mut lines = text.lines();
        match lines.next() {
            Some("id,x,y,mark,pinned") => {}
            other => return Err(Error::Parse(format!("unexpected seed CSV header {other:?}"))),
        }
        let mut seeds = Vec::new();
        for (row, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!("row {row}: expected 5 fields, got {}", fields.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {row}: {e}")));
            let id: usize = fields[0].parse().map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            if id != seeds.len() {
                return Err(Error::Parse(format!("row {row}: id {id} out of sequence")));
            }
            let position = Point2::new(num(fields[1])?, num(fields[2])?);
            if !domain.contains(position) {
                return Err(Error::InvalidParameter(format!("seed {position} lies outside the box")));
            }
            let pinned = match fields[4] {
                "1" => true,
                "0" => false,
                other => return Err(Error::Parse(format!("row {row}: bad pinned flag {other:?}"))),
            };
            seeds.push(SeedPoint { id, position, mark: Direction::from_code(fields[3])?, pinned });
        }
        Ok(SeedSet { seeds, domain, intensity: 0.0, rng_seed: 0 })
    }
}

/// Draws from `rng`: `K ~ Poisson(λ·N²)` then `K` i.i.d. uniform marked points.
pub fn sample_poisson_with<R: Rng + ?Sized>(
    rng: &mut R,
    domain: BoxDomain,
    intensity: f64,
    marks: MarkDistribution,
) -> Result<Vec<SeedPoint>> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::InvalidParameter(format!("intensity must be positive, got {intensity}")));
    }
    let mean = intensity * domain.area();
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let n = domain.side();
    Ok((0..count)
        .map(|id| {
            let position = Point2::new(rng.random::<f64>() * n, rng.random::<f64>() * n);
            SeedPoint { id, position, mark: marks.sample(rng), pinned: false }
        })
        .collect())
}

/// Marked homogeneous Poisson sample on the box. Bit-identical for identical arguments.
pub fn sample_poisson(domain: BoxDomain, intensity: f64, marks: MarkDistribution, rng_seed: u64) -> Result<SeedSet> {
    let mut rng = stream_rng(rng_seed, 0, "poisson");
    let seeds = sample_poisson_with(&mut rng, domain, intensity, marks)?;
    check_general_position(&seeds)?;
    Ok(SeedSet { seeds, domain, intensity, rng_seed })
}

/// Free function form of [`SeedSet::insert_palm`].
pub fn insert_palm(set: &SeedSet, points: &[(Point2, Direction)]) -> Result<SeedSet> {
    set.insert_palm(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: f64) -> BoxDomain {
        BoxDomain::new(n).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BoxDomain::new(0.0).is_err());
        assert!(sample_poisson(dom(1.0), 0.0, MarkDistribution::default(), 1).is_err());
        assert!(sample_poisson(dom(1.0), -2.0, MarkDistribution::default(), 1).is_err());
        assert!(MarkDistribution::new(0.0).is_err());
        assert!(MarkDistribution::new(1.0).is_err());
    }

    #[test]
    fn vanishing_box_is_almost_surely_empty() {
        let empty = (0..200)
            .filter(|&s| sample_poisson(dom(1e-6), 5.0, MarkDistribution::default(), s).unwrap().is_empty())
            .count();
        assert_eq!(empty, 200);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_poisson(dom(20.0), 1.0, MarkDistribution::default(), 42).unwrap();
        let b = sample_poisson(dom(20.0), 1.0, MarkDistribution::default(), 42).unwrap();
        let c = sample_poisson(dom(20.0), 1.0, MarkDistribution::default(), 43).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_ne!(a.to_csv(), c.to_csv());
    }

    // Poisson(400) counts: mean within 3·sqrt(400/2000).
    #[test]
    fn count_mean_matches_intensity() {
        let reps = 2000;
        let total: usize =
            (0..reps).map(|s| sample_poisson(dom(20.0), 1.0, MarkDistribution::default(), s).unwrap().len()).sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 400.0).abs() < 3.0 * (400.0f64 / reps as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn vertical_fraction_matches_p() {
        let mut v = 0usize;
        let mut n = 0usize;
        for s in 0..50 {
            let set = sample_poisson(dom(20.0), 1.0, MarkDistribution::default(), s).unwrap();
            v += set.seeds().iter().filter(|p| p.mark == Direction::Vertical).count();
            n += set.len();
        }
        let frac = v as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * se, "fraction {frac}");
    }

    #[test]
    fn restriction_of_a_larger_sample_has_the_same_count_law() {
        let reps = 1000;
        let small: usize = (0..reps)
            .map(|s| {
                sample_poisson(dom(20.0), 1.0, MarkDistribution::default(), 7 * s + 1)
                    .unwrap()
                    .retain_background(|p| p.x <= 10.0 && p.y <= 10.0)
                    .len()
            })
            .sum();
        let direct: usize = (0..reps)
            .map(|s| sample_poisson(dom(10.0), 1.0, MarkDistribution::default(), 7 * s + 3).unwrap().len())
            .sum();
        let (a, b) = (small as f64 / reps as f64, direct as f64 / reps as f64);
        // both means estimate 100 with variance 100/reps each
        let se = (2.0 * 100.0 / reps as f64).sqrt();
        assert!((a - b).abs() < 3.0 * se, "{a} vs {b}");
        assert!((a - 100.0).abs() < 3.0 * (100.0 / reps as f64).sqrt());
    }

    #[test]
    fn palm_insertion() {
        let empty = SeedSet::empty(dom(4.0));
        let pts = [(Point2::new(1.0, 1.0), Direction::Horizontal), (Point2::new(2.0, 3.0), Direction::Vertical)];
        let set = empty.insert_palm(&pts).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.seeds().iter().all(|s| s.pinned));
        assert_eq!(set.seeds()[1].position, Point2::new(2.0, 3.0));

        assert!(matches!(set.insert_palm(&[(Point2::new(1.0, 1.0), Direction::Vertical)]), Err(Error::Degenerate(_))));
        assert!(matches!(set.insert_palm(&[(Point2::new(1.0, 2.5), Direction::Vertical)]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn palm_insertion_leaves_background_untouched() {
        let base = sample_poisson(dom(10.0), 1.0, MarkDistribution::default(), 5).unwrap();
        let with = base.insert_palm(&[(Point2::new(5.123456789, 4.987654321), Direction::Horizontal)]).unwrap();
        let bg: Vec<_> = with.background().copied().collect();
        assert_eq!(bg, base.seeds());
        assert_eq!(with.pinned().count(), 1);
    }

    #[test]
    fn jitter_resolves_shared_coordinates() {
        let set = SeedSet {
            seeds: vec![
                SeedPoint { id: 0, position: Point2::new(1.0, 1.0), mark: Direction::Horizontal, pinned: false },
                SeedPoint { id: 1, position: Point2::new(1.0, 2.0), mark: Direction::Vertical, pinned: false },
            ],
            domain: dom(4.0),
            intensity: 0.0,
            rng_seed: 0,
        };
        let err = set.with_policy(PositionPolicy::Strict).unwrap_err();
        assert!(err.to_string().contains("share x = 1"), "{err}");
        let fixed = set.with_policy(PositionPolicy::Jitter { epsilon: 1e-6, rng_seed: 3 }).unwrap();
        assert!((fixed.seeds()[0].position.x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let set = sample_poisson(dom(20.0), 0.5, MarkDistribution::default(), 11)
            .unwrap()
            .insert_palm(&[(Point2::new(0.1 + 0.2, 1.0 / 3.0), Direction::Vertical)])
            .unwrap();
        let text = set.to_csv();
        assert!(text.starts_with("id,x,y,mark,pinned\n"));
        let back = SeedSet::from_csv(dom(20.0), &text).unwrap();
        assert_eq!(back.seeds(), set.seeds());
    }
}
