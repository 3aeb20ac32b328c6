//! Monte Carlo experiments on top of the engine.
//!
//! Replicate `k` of an experiment with master seed `s` draws everything from
//! the stream `(s, k, purpose)`, and replicates are mapped in parallel and
//! collected in index order, so every table is a pure function of its
//! arguments whatever the thread count.
//!
//! Palm experiments place the pinned seeds in a window that covers the
//! dependence squares of the events under study and keep only background
//! seeds inside the union of those squares. A half-ray event at horizon `t`
//! is a function of the seeds in its dependence square, so the finite
//! computation has exactly the law of the process on the whole plane.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{resolve_half_rays, simulate, HalfRay, RayLength};
use crate::error::{Error, Result};
use crate::geometry::{l1_distance, BoxDomain, DependenceRegion, Direction, Point2, Side};
use crate::graph::{euler_check, extract_graph, EulerReport};
use crate::oracle::oracle_simulate;
use crate::rng::{derive_seed, stream_rng};
use crate::sampling::{sample_poisson, sample_poisson_with, MarkDistribution, SeedSet};
use crate::stats::{
    estimate_survival, fit_exponential_tail, indicator_covariance, ks_distance, linspace, mean_and_se, proportion,
    quantile_sorted, Proportion, SurvivalCurve, TailFit,
};

fn replicate_map<T, F>(replicates: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..replicates as u64).into_par_iter().map(f).collect()
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be at least 1".into()));
    }
    Ok(())
}

fn check_intensity(intensity: f64) -> Result<()> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(Error::InvalidParameter(format!("intensity must be non-negative, got {intensity}")));
    }
    Ok(())
}

/// A Palm instance in a local frame: pinned seeds occupy the last ids.
pub struct PalmInstance {
    pub seeds: SeedSet,
    pub pinned_ids: Vec<usize>,
    /// Global position of the local origin.
    pub offset: Point2,
}

/// Background of intensity `intensity` restricted to the union of the dependence squares
/// `regions` (given in global coordinates), with `pinned` inserted. Zero intensity means no
/// background at all.
pub fn palm_instance<R: Rng + ?Sized>(
    rng: &mut R,
    pinned: &[(Point2, Direction)],
    regions: &[DependenceRegion],
    intensity: f64,
    marks: MarkDistribution,
) -> Result<PalmInstance> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in regions {
        let (a, b, c, d) = r.bounding_box();
        x0 = x0.min(a);
        x1 = x1.max(b);
        y0 = y0.min(c);
        y1 = y1.max(d);
    }
    for (p, _) in pinned {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let side = (x1 - x0).max(y1 - y0);
    let domain = BoxDomain::new(side)?;
    let offset = Point2::new(x0, y0);
    let local = |p: Point2| Point2::new(p.x - x0, p.y - y0);
    let local_pinned: Vec<(Point2, Direction)> = pinned.iter().map(|&(p, d)| (local(p), d)).collect();
    let local_regions: Vec<DependenceRegion> =
        regions.iter().map(|r| DependenceRegion { apex: local(r.apex), ..*r }).collect();

    let background = if intensity > 0.0 {
        let pts = sample_poisson_with(rng, domain, intensity, marks)?
            .into_iter()
            .filter(|s| local_regions.iter().any(|r| r.contains(s.position)))
            .collect();
        SeedSet::from_background(domain, pts, intensity, 0)?
    } else {
        SeedSet::empty(domain)
    };
    let first = background.len();
    let seeds = background.insert_palm(&local_pinned)?;
    Ok(PalmInstance { pinned_ids: (first..first + pinned.len()).collect(), seeds, offset })
}

/// Both half-rays of a Palm seed at the origin, resolved up to `t_max`.
fn palm_half_rays(intensity: f64, t_max: f64, mark: Direction, master_seed: u64, k: u64) -> Result<(HalfRay, HalfRay)> {
    let v = Point2::new(0.0, 0.0);
    let regions =
        [DependenceRegion::new(v, mark, Side::Plus, t_max)?, DependenceRegion::new(v, mark, Side::Minus, t_max)?];
    let mut rng = stream_rng(master_seed, k, "palm-lengths");
    let inst = palm_instance(&mut rng, &[(v, mark)], &regions, intensity, MarkDistribution::default())?;
    let id = inst.pinned_ids[0];
    let rays = resolve_half_rays(&inst.seeds, t_max, &[(id, Side::Plus), (id, Side::Minus)])?;
    Ok((rays[0], rays[1]))
}

/// Per-side lengths of the segment through a Palm seed, one pair per replicate.
pub fn sample_half_ray_lengths(
    intensity: f64,
    t_max: f64,
    replicates: usize,
    rng_seed: u64,
    mark: Direction,
) -> Result<Vec<(HalfRay, HalfRay)>> {
    check_replicates(replicates)?;
    check_intensity(intensity)?;
    replicate_map(replicates, |k| palm_half_rays(intensity, t_max, mark, rng_seed, k))
}

/// Total length `L⁺ + L⁻` of the segment through a Palm seed, censored when either side
/// reached `t_max`.
pub fn sample_ray_lengths(
    intensity: f64,
    t_max: f64,
    replicates: usize,
    rng_seed: u64,
    mark: Direction,
) -> Result<Vec<RayLength>> {
    Ok(sample_half_ray_lengths(intensity, t_max, replicates, rng_seed, mark)?
        .into_iter()
        .map(|(p, m)| RayLength { total: p.length + m.length, censored: p.censored() || m.censored() })
        .collect())
}

/// Indicator of `{L^side_v(t) = t}` per replicate for a Palm seed `v`.
pub fn event_indicators(
    v: Point2,
    d_v: Direction,
    side: Side,
    t: f64,
    intensity: f64,
    replicates: usize,
    rng_seed: u64,
) -> Result<Vec<bool>> {
    check_replicates(replicates)?;
    check_intensity(intensity)?;
    if t == 0.0 {
        return Ok(vec![true; replicates]);
    }
    let region = DependenceRegion::new(v, d_v, side, t)?;
    replicate_map(replicates, |k| {
        let mut rng = stream_rng(rng_seed, k, "event");
        let inst = palm_instance(&mut rng, &[(v, d_v)], &[region], intensity, MarkDistribution::default())?;
        let ray = resolve_half_rays(&inst.seeds, t, &[(inst.pinned_ids[0], side)])?[0];
        Ok(ray.length >= t)
    })
}

pub fn estimate_event_probability(
    v: Point2,
    d_v: Direction,
    side: Side,
    t: f64,
    intensity: f64,
    replicates: usize,
    rng_seed: u64,
) -> Result<Proportion> {
    Ok(proportion(&event_indicators(v, d_v, side, t, intensity, replicates, rng_seed)?))
}

/// Two pinned seeds and the sides of the growth events compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairConfig {
    pub u: Point2,
    pub d_u: Direction,
    pub side_u: Side,
    pub v: Point2,
    pub d_v: Direction,
    pub side_v: Side,
}

impl PairConfig {
    /// The `A⁺`–`A⁺` pairing.
    pub fn plus(u: Point2, d_u: Direction, v: Point2, d_v: Direction) -> Self {
        PairConfig { u, d_u, side_u: Side::Plus, v, d_v, side_v: Side::Plus }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub p_u: f64,
    pub p_v: f64,
    pub p_joint: f64,
    pub config: PairConfig,
    pub t: f64,
}

/// Joint indicators `(A_u, A_v)` per replicate, both seeds pinned.
pub fn pair_indicators(
    cfg: PairConfig,
    t: f64,
    intensity: f64,
    replicates: usize,
    rng_seed: u64,
) -> Result<Vec<(bool, bool)>> {
    check_replicates(replicates)?;
    check_intensity(intensity)?;
    if cfg.u == cfg.v {
        return Err(Error::CoincidentPoints(cfg.u.x, cfg.u.y));
    }
    let regions =
        [DependenceRegion::new(cfg.u, cfg.d_u, cfg.side_u, t)?, DependenceRegion::new(cfg.v, cfg.d_v, cfg.side_v, t)?];
    replicate_map(replicates, |k| {
        let mut rng = stream_rng(rng_seed, k, "pair");
        let inst = palm_instance(
            &mut rng,
            &[(cfg.u, cfg.d_u), (cfg.v, cfg.d_v)],
            &regions,
            intensity,
            MarkDistribution::default(),
        )?;
        let (iu, iv) = (inst.pinned_ids[0], inst.pinned_ids[1]);
        let rays = resolve_half_rays(&inst.seeds, t, &[(iu, cfg.side_u), (iv, cfg.side_v)])?;
        Ok((rays[0].length >= t, rays[1].length >= t))
    })
}

pub fn estimate_covariance(
    cfg: PairConfig,
    t: f64,
    intensity: f64,
    replicates: usize,
    rng_seed: u64,
) -> Result<CovarianceEstimate> {
    let pairs = pair_indicators(cfg, t, intensity, replicates, rng_seed)?;
    let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
    let c = indicator_covariance(&a, &b)?;
    Ok(CovarianceEstimate {
        value: c.value,
        std_error: c.std_error,
        replicates,
        p_u: c.p_a,
        p_v: c.p_b,
        p_joint: c.p_joint,
        config: cfg,
        t,
    })
}

/// Geometry of a distance sweep: `u` at the origin, `v = distance · heading` with `‖heading‖₁ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub d_u: Direction,
    pub side_u: Side,
    pub d_v: Direction,
    pub side_v: Side,
    pub heading: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub distance: f64,
    pub value: f64,
    pub abs_value: f64,
    pub std_error: f64,
    /// `t ≤ distance / 4`: the events are independent.
    pub independent_regime: bool,
}

pub fn covariance_decay_sweep(
    cfg: SweepConfig,
    distances: &[f64],
    t: f64,
    intensity: f64,
    replicates: usize,
    rng_seed: u64,
) -> Result<Vec<DecayRow>> {
    if distances.windows(2).any(|w| w[0] >= w[1]) || distances.iter().any(|&d| d <= 0.0) {
        return Err(Error::InvalidParameter("distances must be positive and increasing".into()));
    }
    let norm = cfg.heading.0.abs() + cfg.heading.1.abs();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("sweep heading must be non-zero".into()));
    }
    let (hx, hy) = (cfg.heading.0 / norm, cfg.heading.1 / norm);
    distances
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let u = Point2::new(0.0, 0.0);
            let v = Point2::new(d * hx, d * hy);
            let pair = PairConfig { u, d_u: cfg.d_u, side_u: cfg.side_u, v, d_v: cfg.d_v, side_v: cfg.side_v };
            let est =
                estimate_covariance(pair, t, intensity, replicates, derive_seed(rng_seed, i as u64, "cov-sweep"))?;
            Ok(DecayRow {
                distance: l1_distance(u, v),
                value: est.value,
                abs_value: est.value.abs(),
                std_error: est.std_error,
                independent_regime: t <= l1_distance(u, v) / 4.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeRow {
    pub n: f64,
    pub intensity: f64,
    pub replicates: usize,
    pub mean: f64,
    pub std_error: f64,
    /// `mean / (√λ · N)`.
    pub normalized: f64,
}

pub fn escaping_counts(intensity: f64, n: f64, replicates: usize, rng_seed: u64) -> Result<Vec<usize>> {
    check_replicates(replicates)?;
    let domain = BoxDomain::new(n)?;
    replicate_map(replicates, |k| {
        let seeds = sample_poisson(domain, intensity, MarkDistribution::default(), derive_seed(rng_seed, k, "escape"))?;
        simulate(&seeds, n)?.escaping_rays()
    })
}

pub fn escaping_expectation(
    intensity: f64,
    n_values: &[f64],
    replicates: usize,
    rng_seed: u64,
) -> Result<Vec<EscapeRow>> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("box sides must be increasing".into()));
    }
    n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let counts = escaping_counts(intensity, n, replicates, derive_seed(rng_seed, i as u64, "escape-n"))?;
            let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let (mean, std_error) = mean_and_se(&xs);
            Ok(EscapeRow { n, intensity, replicates, mean, std_error, normalized: mean / (intensity.sqrt() * n) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerSummary {
    pub instances: usize,
    pub passes: usize,
    pub reports: Vec<EulerReport>,
}

pub fn euler_experiment(intensity: f64, n: f64, replicates: usize, rng_seed: u64) -> Result<EulerSummary> {
    check_replicates(replicates)?;
    let domain = BoxDomain::new(n)?;
    let reports = replicate_map(replicates, |k| {
        let seeds = sample_poisson(domain, intensity, MarkDistribution::default(), derive_seed(rng_seed, k, "euler"))?;
        let g = extract_graph(&simulate(&seeds, n)?)?;
        Ok(euler_check(&g, seeds.len()))
    })?;
    Ok(EulerSummary { instances: replicates, passes: reports.iter().filter(|r| r.pass).count(), reports })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleInstance {
    pub seeds: usize,
    pub cause_mismatches: usize,
    pub max_length_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub dt: f64,
    pub instances: Vec<OracleInstance>,
    pub total_mismatches: usize,
    pub max_length_error: f64,
    pub pass: bool,
}

/// Runs the engine and the time-stepping oracle on the same Poisson instances.
pub fn oracle_check(intensity: f64, n: f64, replicates: usize, rng_seed: u64, dt: f64) -> Result<OracleSummary> {
    check_replicates(replicates)?;
    let domain = BoxDomain::new(n)?;
    let instances = replicate_map(replicates, |k| {
        let seeds = sample_poisson(domain, intensity, MarkDistribution::default(), derive_seed(rng_seed, k, "oracle"))?;
        let exact = simulate(&seeds, n)?;
        let approx = oracle_simulate(&seeds, n, dt)?;
        let mut cause_mismatches = 0;
        let mut max_length_error: f64 = 0.0;
        for (a, b) in exact.half_rays().iter().zip(approx.half_rays()) {
            if a.blocker() != b.blocker() {
                cause_mismatches += 1;
            }
            max_length_error = max_length_error.max((a.length - b.length).abs());
        }
        Ok(OracleInstance { seeds: seeds.len(), cause_mismatches, max_length_error })
    })?;
    let total_mismatches = instances.iter().map(|i| i.cause_mismatches).sum();
    let max_length_error = instances.iter().map(|i| i.max_length_error).fold(0.0, f64::max);
    Ok(OracleSummary {
        dt,
        pass: total_mismatches == 0 && max_length_error <= 2.0 * dt,
        instances,
        total_mismatches,
        max_length_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSummary {
    pub intensity: f64,
    pub t_max: f64,
    pub replicates: usize,
    pub mean_length: f64,
    pub censored_fraction: f64,
    pub curve: SurvivalCurve,
    pub fit: TailFit,
}

/// Default fit window: from the median to the 95th percentile of the total lengths, kept
/// below the censor point.
pub fn default_fit_range(totals: &[f64], censor_point: f64) -> (f64, f64) {
    let mut sorted = totals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, 0.5);
    let hi = quantile_sorted(&sorted, 0.95).min(censor_point);
    (lo, hi)
}

pub fn tail_from_lengths(lengths: &[RayLength], intensity: f64, t_max: f64, grid_points: usize) -> Result<TailSummary> {
    if lengths.is_empty() {
        return Err(Error::InsufficientData("no lengths".into()));
    }
    let totals: Vec<f64> = lengths.iter().map(|l| l.total).collect();
    let range = default_fit_range(&totals, t_max);
    let grid = linspace(range.0, range.1, grid_points.max(3));
    let grid: Vec<f64> = grid.into_iter().filter(|&t| t < t_max).collect();
    let curve = estimate_survival(&totals, &grid)?.with_censor_point(t_max);
    let fit = fit_exponential_tail(&curve, range)?;
    Ok(TailSummary {
        intensity,
        t_max,
        replicates: lengths.len(),
        mean_length: totals.iter().sum::<f64>() / totals.len() as f64,
        censored_fraction: lengths.iter().filter(|l| l.censored).count() as f64 / lengths.len() as f64,
        curve,
        fit,
    })
}

pub fn tail_experiment(
    intensity: f64,
    t_max: f64,
    replicates: usize,
    rng_seed: u64,
    mark: Direction,
    grid_points: usize,
) -> Result<TailSummary> {
    let lengths = sample_ray_lengths(intensity, t_max, replicates, rng_seed, mark)?;
    tail_from_lengths(&lengths, intensity, t_max, grid_points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub intensity_a: f64,
    pub intensity_b: f64,
    pub t_max_a: f64,
    pub t_max_b: f64,
    pub replicates: usize,
    pub pairs_used: usize,
    /// KS distance between `√(λ_b/λ_a)·L_b` and `L_a`.
    pub ks_distance: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub rate_ratio: f64,
    pub r_squared_a: f64,
    pub r_squared_b: f64,
}

/// Compares segment lengths at two intensities. The second sample runs at horizon
/// `t_max·√(λ_a/λ_b)` so both are exact rescalings of one another.
pub fn scaling_experiment(
    intensity_a: f64,
    intensity_b: f64,
    t_max: f64,
    replicates: usize,
    rng_seed: u64,
    grid_points: usize,
) -> Result<ScalingSummary> {
    if !(intensity_a > 0.0 && intensity_b > 0.0) {
        return Err(Error::InvalidParameter("both intensities must be positive".into()));
    }
    let factor = (intensity_b / intensity_a).sqrt();
    let t_b = t_max / factor;
    let a =
        sample_ray_lengths(intensity_a, t_max, replicates, derive_seed(rng_seed, 0, "scaling"), Direction::Horizontal)?;
    let b =
        sample_ray_lengths(intensity_b, t_b, replicates, derive_seed(rng_seed, 1, "scaling"), Direction::Horizontal)?;
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for (la, lb) in a.iter().zip(&b) {
        if !la.censored && !lb.censored {
            xa.push(la.total);
            xb.push(lb.total * factor);
        }
    }
    let ks = ks_distance(&xa, &xb)?;
    let fa = tail_from_lengths(&a, intensity_a, t_max, grid_points)?.fit;
    let fb = tail_from_lengths(&b, intensity_b, t_b, grid_points)?.fit;
    Ok(ScalingSummary {
        intensity_a,
        intensity_b,
        t_max_a: t_max,
        t_max_b: t_b,
        replicates,
        pairs_used: xa.len(),
        ks_distance: ks,
        rate_a: fa.rate,
        rate_b: fb.rate,
        rate_ratio: fb.rate / fa.rate,
        r_squared_a: fa.r_squared,
        r_squared_b: fb.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Direction::{Horizontal as H, Vertical as V};

    #[test]
    fn empty_environment_grows_freely() {
        let ls = sample_ray_lengths(1e-9, 3.0, 5, 1, H).unwrap();
        assert!(ls.iter().all(|l| l.total == 6.0 && l.censored));
        let p = estimate_event_probability(Point2::new(1.0, 1.0), V, Side::Plus, 2.0, 0.0, 10, 1).unwrap();
        assert_eq!(p.value, 1.0);
    }

    #[test]
    fn zero_horizon_event_is_certain() {
        let p = estimate_event_probability(Point2::new(0.0, 0.0), H, Side::Minus, 0.0, 1.0, 7, 3).unwrap();
        assert_eq!((p.value, p.std_error), (1.0, 0.0));
    }

    #[test]
    fn coincident_pair_is_rejected() {
        let o = Point2::new(0.0, 0.0);
        assert!(estimate_covariance(PairConfig::plus(o, H, o, V), 1.0, 1.0, 5, 0).is_err());
    }

    #[test]
    fn palm_instance_keeps_only_dependence_squares() {
        let v = Point2::new(3.0, -2.0);
        let region = DependenceRegion::new(v, H, Side::Plus, 2.0).unwrap();
        let mut rng = stream_rng(5, 0, "t");
        let inst = palm_instance(&mut rng, &[(v, H)], &[region], 3.0, MarkDistribution::default()).unwrap();
        let local = DependenceRegion { apex: inst.seeds.seeds()[inst.pinned_ids[0]].position, ..region };
        assert!(inst.seeds.background().all(|s| local.contains(s.position)));
        assert!(inst.seeds.background().count() > 0);
        assert_eq!(inst.seeds.pinned().count(), 1);
        assert_eq!(inst.offset, Point2::new(3.0, -4.0));
    }

    #[test]
    fn replicates_are_reproducible() {
        let a = sample_ray_lengths(1.0, 3.0, 20, 9, V).unwrap();
        let b = sample_ray_lengths(1.0, 3.0, 20, 9, V).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn escaping_rays_of_empty_instances_are_zero() {
        let c = escaping_counts(1e-9, 5.0, 4, 2).unwrap();
        assert_eq!(c, vec![0; 4]);
    }
}
