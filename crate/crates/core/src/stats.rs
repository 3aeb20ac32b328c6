//! Estimators used by the Monte Carlo experiments: empirical survival
//! functions, log-linear tail fits, two-sample KS distance and plug-in /
//! delta-method standard errors.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub grid: Vec<f64>,
    pub survival: Vec<f64>,
    pub sample_size: usize,
    /// Samples at or above this value are censored; the curve is exact only below it.
    pub censor_point: f64,
}

/// `S(t_k)` = fraction of samples strictly greater than `t_k`.
pub fn estimate_survival(lengths: &[f64], grid: &[f64]) -> Result<SurvivalCurve> {
    if lengths.is_empty() {
        return Err(Error::InsufficientData("survival estimate of an empty sample".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("survival grid must be strictly increasing".into()));
    }
    let mut sorted = lengths.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let survival = grid.iter().map(|&t| (n - sorted.partition_point(|&x| x <= t)) as f64 / n as f64).collect();
    Ok(SurvivalCurve { grid: grid.to_vec(), survival, sample_size: n, censor_point: f64::INFINITY })
}

impl SurvivalCurve {
    pub fn with_censor_point(mut self, censor_point: f64) -> Self {
        self.censor_point = censor_point;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,survival\n");
        for (t, s) in self.grid.iter().zip(&self.survival) {
            out.push_str(&format!("{t},{s}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    /// `−slope` of `ln S` against `t`.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub fit_range: (f64, f64),
    pub points: usize,
}

/// Least-squares line through `(t_k, ln S(t_k))` for grid points in `range` with `S > 0`
/// below the censor point.
pub fn fit_exponential_tail(curve: &SurvivalCurve, range: (f64, f64)) -> Result<TailFit> {
    let pts: Vec<(f64, f64)> = curve
        .grid
        .iter()
        .zip(&curve.survival)
        .filter(|&(&t, &s)| t >= range.0 && t <= range.1 && s > 0.0 && t < curve.censor_point)
        .map(|(&t, &s)| (t, s.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("tail fit needs 3 usable grid points, found {}", pts.len())));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(TailFit { rate: -slope, intercept, r_squared, fit_range: range, points: pts.len() })
}

/// Linear-interpolation empirical quantile of an already sorted sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `n` equally spaced points spanning `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F₁ − F₂|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("KS distance needs two non-empty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Frequency of `true` with plug-in standard error `sqrt(p(1−p)/n)`.
pub fn proportion(flags: &[bool]) -> Proportion {
    let n = flags.len();
    let p = flags.iter().filter(|&&f| f).count() as f64 / n.max(1) as f64;
    Proportion { value: p, std_error: (p * (1.0 - p) / n.max(1) as f64).sqrt(), n }
}

/// Sample covariance of two indicator series with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorCovariance {
    pub value: f64,
    pub std_error: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_joint: f64,
    pub n: usize,
}

pub fn indicator_covariance(a: &[bool], b: &[bool]) -> Result<IndicatorCovariance> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InsufficientData("covariance needs two equally long non-empty series".into()));
    }
    let n = a.len() as f64;
    let pa = a.iter().filter(|&&x| x).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x).count() as f64 / n;
    let pj = a.iter().zip(b).filter(|(&x, &y)| x && y).count() as f64 / n;
    let value = pj - pa * pb;
    // influence function of the plug-in covariance: (X − p_a)(Y − p_b) − C
    let var = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let psi = (x as u8 as f64 - pa) * (y as u8 as f64 - pb) - value;
            psi * psi
        })
        .sum::<f64>()
        / n;
    Ok(IndicatorCovariance { value, std_error: (var / n).sqrt(), p_a: pa, p_b: pb, p_joint: pj, n: a.len() })
}

/// Pearson correlation of two real series; `0` when either is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn survival_examples() {
        let c = estimate_survival(&[1.0, 2.0, 3.0], &[2.0]).unwrap();
        assert_eq!(c.survival, vec![1.0 / 3.0]);
        let c = estimate_survival(&[1.5; 4], &[1.5]).unwrap();
        assert_eq!(c.survival, vec![0.0]);
        assert!(estimate_survival(&[], &[1.0]).is_err());
        assert!(estimate_survival(&[1.0], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let grid = linspace(0.5, 5.0, 10);
        let curve = SurvivalCurve {
            survival: grid.iter().map(|t| (-2.0 * t).exp()).collect(),
            grid,
            sample_size: 1,
            censor_point: f64::INFINITY,
        };
        let fit = fit_exponential_tail(&curve, (0.0, 10.0)).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_survival_has_zero_rate() {
        let grid = linspace(1.0, 4.0, 4);
        let curve = SurvivalCurve { survival: vec![0.5; 4], grid, sample_size: 1, censor_point: f64::INFINITY };
        let fit = fit_exponential_tail(&curve, (0.0, 10.0)).unwrap();
        assert_eq!(fit.rate, 0.0);
    }

    #[test]
    fn fit_needs_three_points_below_the_censor_point() {
        let grid = linspace(1.0, 4.0, 4);
        let curve = SurvivalCurve { survival: vec![0.5, 0.4, 0.3, 0.2], grid, sample_size: 1, censor_point: 2.5 };
        assert!(matches!(fit_exponential_tail(&curve, (0.0, 10.0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ks_distance_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_distance(&[1.0, 2.0, 3.0, 4.0], &[2.5]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_of_identical_and_disjoint_indicators() {
        let a = [true, false, true, false];
        let c = indicator_covariance(&a, &a).unwrap();
        assert!((c.value - 0.25).abs() < 1e-12);
        let b = [false, true, false, true];
        let c = indicator_covariance(&a, &b).unwrap();
        assert_eq!(c.p_joint, 0.0);
        assert!((c.value + 0.25).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 0.95), 4.8);
    }

    proptest! {
        #[test]
        fn survival_is_monotone_and_bounded(xs in prop::collection::vec(0.0f64..10.0, 1..200)) {
            let grid = linspace(0.0, 10.0, 41);
            let c = estimate_survival(&xs, &grid).unwrap();
            prop_assert!(c.survival.iter().all(|s| (0.0..=1.0).contains(s)));
            prop_assert!(c.survival.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn indicator_covariance_is_bounded(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..300)) {
            let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let c = indicator_covariance(&a, &b).unwrap();
            prop_assert!(c.value.abs() <= 0.25 + 1e-12);
        }
    }
}
