//! Small statistics toolkit: order statistics, bootstrap, least squares, rank tests.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{LfppError, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    median_sorted(&sorted(xs))
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Linearly interpolated quantile of sorted data (R type 7).
pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(xs), q)
}

/// Percentile-bootstrap confidence interval for the median.
pub fn bootstrap_median_ci(xs: &[f64], resamples: usize, level: f64, rng: &mut impl Rng) -> (f64, f64) {
    let n = xs.len();
    let mut meds = Vec::with_capacity(resamples);
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        for b in buf.iter_mut() {
            *b = xs[rng.random_range(0..n)];
        }
        buf.sort_by(f64::total_cmp);
        meds.push(median_sorted(&buf));
    }
    meds.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    (quantile_sorted(&meds, alpha / 2.0), quantile_sorted(&meds, 1.0 - alpha / 2.0))
}

/// Two-sided Student t quantile.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub n: usize,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(LfppError::DegenerateFit(format!("{n} points")));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(LfppError::DegenerateFit("all abscissae equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr_slope = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LinearFit { slope, intercept, stderr_slope, n })
}

/// Ranks starting at 1, ties averaged.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMethod {
    ExactPermutation,
    StudentT,
}

/// Spearman rank correlation with one-sided p-values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub rho: f64,
    /// P(rho >= observed) under independence.
    pub p_increasing: f64,
    /// P(rho <= observed) under independence.
    pub p_decreasing: f64,
    pub method: TrendMethod,
}

/// Level used for every trend verdict.
pub const TREND_ALPHA: f64 = 0.10;

impl Trend {
    pub fn significantly_increasing(&self) -> bool {
        self.p_increasing < TREND_ALPHA
    }

    pub fn significantly_decreasing(&self) -> bool {
        self.p_decreasing < TREND_ALPHA
    }
}

/// Spearman trend of `y` against `x`. Exact permutation null for up to 8 untied points,
/// otherwise the t approximation with `m - 2` degrees of freedom.
pub fn spearman_trend(x: &[f64], y: &[f64]) -> Result<Trend> {
    let m = x.len();
    if m != y.len() || m < 3 {
        return Err(LfppError::InvalidArgument(format!("trend test needs at least 3 paired points, got {m}")));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let rho = pearson(&rx, &ry);
    let untied = |r: &[f64]| r.iter().all(|v| v.fract() == 0.0);
    if m <= 8 && untied(&rx) && untied(&ry) {
        let mut perm = ry.clone();
        let (mut ge, mut le, mut total) = (0usize, 0usize, 0usize);
        let tol = 1e-12;
        heap_permutations(&mut perm, &mut |p| {
            let r = pearson(&rx, p);
            total += 1;
            ge += (r >= rho - tol) as usize;
            le += (r <= rho + tol) as usize;
        });
        return Ok(Trend {
            rho,
            p_increasing: ge as f64 / total as f64,
            p_decreasing: le as f64 / total as f64,
            method: TrendMethod::ExactPermutation,
        });
    }
    let df = (m - 2) as f64;
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    let r = rho.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    let t = r * (df / (1.0 - r * r)).sqrt();
    Ok(Trend { rho, p_increasing: 1.0 - dist.cdf(t), p_decreasing: dist.cdf(t), method: TrendMethod::StudentT })
}

fn heap_permutations(v: &mut [f64], f: &mut impl FnMut(&[f64])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    f(v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            f(v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    pub u: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

/// Mann-Whitney U test, normal approximation with tie correction.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(LfppError::InvalidArgument("Mann-Whitney needs two nonempty samples".into()));
    }
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = ranks(&all);
    let r1: f64 = r[..n1].iter().sum();
    let (f1, f2) = (n1 as f64, n2 as f64);
    let u = r1 - f1 * (f1 + 1.0) / 2.0;
    let n = f1 + f2;
    let mut s = sorted(&all);
    s.dedup();
    let ties: f64 = s
        .iter()
        .map(|v| {
            let t = all.iter().filter(|x| *x == v).count() as f64;
            t * t * t - t
        })
        .sum();
    let var = f1 * f2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(MannWhitney { u, z: 0.0, p_two_sided: 1.0 });
    }
    let z = (u - f1 * f2 / 2.0) / var.sqrt();
    let p = 2.0 * (1.0 - Normal::standard().cdf(z.abs()));
    Ok(MannWhitney { u, z, p_two_sided: p.min(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn order_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.3), 3.0);
    }

    #[test]
    fn ols_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-15);
        assert!((fit.intercept - 2.0).abs() < 1e-15);
        assert!(fit.stderr_slope < 1e-15);
        assert!(matches!(ols(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]), Err(LfppError::DegenerateFit(_))));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn exact_spearman_p_values() {
        // perfectly increasing 5 points: only the identity permutation reaches rho = 1
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let t = spearman_trend(&x, &x).unwrap();
        assert_eq!(t.method, TrendMethod::ExactPermutation);
        assert!((t.rho - 1.0).abs() < 1e-15);
        assert!((t.p_increasing - 1.0 / 120.0).abs() < 1e-15);
        assert_eq!(t.p_decreasing, 1.0);
        let down: Vec<f64> = x.iter().rev().copied().collect();
        let t = spearman_trend(&x, &down).unwrap();
        assert!(t.significantly_decreasing() && !t.significantly_increasing());
    }

    #[test]
    fn t_approximation_for_long_series() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.7).sin()).collect();
        let t = spearman_trend(&x, &y).unwrap();
        assert_eq!(t.method, TrendMethod::StudentT);
        assert!((t.p_increasing + t.p_decreasing - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_symmetric_and_separating() {
        let a: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| i as f64 + 0.5).collect();
        let t = mann_whitney(&a, &b).unwrap();
        assert!(t.p_two_sided > 0.5);
        let far: Vec<f64> = (0..40).map(|i| i as f64 + 100.0).collect();
        assert!(mann_whitney(&a, &far).unwrap().p_two_sided < 1e-6);
        // all tied
        assert_eq!(mann_whitney(&[1.0, 1.0], &[1.0, 1.0]).unwrap().p_two_sided, 1.0);
    }

    #[test]
    fn bootstrap_interval_brackets_median() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..101).map(|_| rng.random::<f64>()).collect();
        let (lo, hi) = bootstrap_median_ci(&xs, 1000, 0.95, &mut rng);
        let m = median(&xs);
        assert!(lo <= m && m <= hi);
        assert!(hi - lo < 0.3);
    }
}
