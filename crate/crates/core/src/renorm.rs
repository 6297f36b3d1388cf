//! Monte Carlo estimates of the crossing medians `a_eps`, power-law fits and scaling ratios.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LfppError, Result};
use crate::gff::{mollify_localized_window, sample_torus_gff, MollifiedField, Mollifier, Params};
use crate::lattice::LatticeSpec;
use crate::metric::{build_weighted_grid, lr_crossing, Region};
use crate::seed::{split, stream_rng, BOOTSTRAP_STREAM};
use crate::stats::{self, Trend};

/// Fewest trials accepted for an estimate that carries a confidence interval.
pub const MIN_TRIALS: usize = 20;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub lattice: LatticeSpec,
    /// Use the localized mollifier instead of the full heat kernel.
    pub localized: bool,
    pub parallel: bool,
}

impl MCConfig {
    pub fn new(trials: usize, master_seed: u64, lattice: LatticeSpec) -> Self {
        Self { trials, master_seed, lattice, localized: false, parallel: true }
    }
}

/// `hat a_eps` with its 95% percentile-bootstrap interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianEstimate {
    pub epsilon: f64,
    pub median: f64,
    pub trials: usize,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub master_seed: u64,
    pub xi: f64,
    pub n: usize,
    pub spacing: f64,
    pub localized: bool,
}

impl MedianEstimate {
    /// Summarize per-trial crossing values (indexed by trial).
    pub fn from_samples(epsilon: f64, samples: &[f64], xi: f64, mc: &MCConfig) -> Result<Self> {
        if samples.len() < MIN_TRIALS {
            return Err(LfppError::InsufficientTrials(samples.len()));
        }
        let median = stats::median(samples);
        let mut rng = stream_rng(mc.master_seed, BOOTSTRAP_STREAM);
        let (lo, hi) = stats::bootstrap_median_ci(samples, BOOTSTRAP_RESAMPLES, 0.95, &mut rng);
        Ok(Self {
            epsilon,
            median,
            trials: samples.len(),
            ci_lo: lo.min(median),
            ci_hi: hi.max(median),
            master_seed: mc.master_seed,
            xi,
            n: mc.lattice.n(),
            spacing: mc.lattice.spacing(),
            localized: mc.localized,
        })
    }

    pub fn ci_overlaps(&self, other: &MedianEstimate) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

/// Unit-square crossing distances of one field sample at each `epsilon`.
pub fn trial_crossings(spec: &LatticeSpec, seed: u64, eps: &[f64], xi: f64, localized: bool) -> Result<Vec<f64>> {
    let field = sample_torus_gff(spec, seed)?;
    let square = Region::unit_square();
    let window = square.resolve(spec)?.rect;
    let mollifier = (!localized).then(|| Mollifier::new(&field));
    eps.iter()
        .map(|&e| {
            let moll: MollifiedField = match &mollifier {
                Some(m) => m.mollify(e)?,
                None => mollify_localized_window(&field, e, window)?,
            };
            let grid = build_weighted_grid(&moll, xi, &square)?;
            Ok(lr_crossing(&grid, &square)?.value.to_f64())
        })
        .collect()
}

fn check_ladder(eps: &[f64], mc: &MCConfig) -> Result<()> {
    if mc.trials < MIN_TRIALS {
        return Err(LfppError::InsufficientTrials(mc.trials));
    }
    let spec = &mc.lattice;
    if !spec.contains_box(crate::lattice::Point::new(0.0, 0.0), crate::lattice::Point::new(1.0, 1.0)) {
        return Err(LfppError::OutOfDomain("unit square outside the lattice".into()));
    }
    for &e in eps {
        if !(e.is_finite() && e >= 2.0 * spec.spacing()) {
            return Err(LfppError::MollificationTooFine { epsilon: e, spacing: spec.spacing() });
        }
    }
    Ok(())
}

/// Estimates for several `epsilon` from the same trials: trial `i` samples one field with
/// seed `split(master_seed, i)` and measures it at every scale.
pub fn estimate_ladder(eps: &[f64], params: &Params, mc: &MCConfig) -> Result<Vec<MedianEstimate>> {
    check_ladder(eps, mc)?;
    let run = |i: usize| trial_crossings(&mc.lattice, split(mc.master_seed, i as u64), eps, params.xi, mc.localized);
    let per_trial: Vec<Vec<f64>> = if mc.parallel {
        (0..mc.trials).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..mc.trials).map(run).collect::<Result<_>>()?
    };
    eps.iter()
        .enumerate()
        .map(|(k, &e)| {
            let samples: Vec<f64> = per_trial.iter().map(|t| t[k]).collect();
            MedianEstimate::from_samples(e, &samples, params.xi, mc)
        })
        .collect()
}

pub fn estimate_a_eps(epsilon: f64, params: &Params, mc: &MCConfig) -> Result<MedianEstimate> {
    Ok(estimate_ladder(&[epsilon], params, mc)?.remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    eps: u64,
    xi: u64,
    trials: usize,
    seed: u64,
    n: usize,
    spacing: u64,
    origin: (u64, u64),
    localized: bool,
}

impl CacheKey {
    fn new(e: f64, params: &Params, mc: &MCConfig) -> Self {
        let o = mc.lattice.origin();
        Self {
            eps: e.to_bits(),
            xi: params.xi.to_bits(),
            trials: mc.trials,
            seed: mc.master_seed,
            n: mc.lattice.n(),
            spacing: mc.lattice.spacing().to_bits(),
            origin: (o.x.to_bits(), o.y.to_bits()),
            localized: mc.localized,
        }
    }
}

/// In-memory store of estimates keyed by the exact bits of `(epsilon, params, config)`.
/// The `parallel` flag is not part of the key; it does not change results.
#[derive(Debug, Default)]
pub struct EstimateCache {
    map: Mutex<HashMap<CacheKey, MedianEstimate>>,
}

impl EstimateCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, epsilon: f64, params: &Params, mc: &MCConfig) -> Option<MedianEstimate> {
        self.map.lock().unwrap().get(&CacheKey::new(epsilon, params, mc)).copied()
    }

    pub fn insert(&self, est: MedianEstimate, params: &Params, mc: &MCConfig) {
        self.map.lock().unwrap().insert(CacheKey::new(est.epsilon, params, mc), est);
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Estimates for `eps`, computing the missing ones in a single shared-trial pass.
    pub fn ladder(&self, eps: &[f64], params: &Params, mc: &MCConfig) -> Result<Vec<MedianEstimate>> {
        let missing: Vec<f64> = eps.iter().copied().filter(|&e| self.get(e, params, mc).is_none()).collect();
        if !missing.is_empty() {
            for est in estimate_ladder(&missing, params, mc)? {
                self.insert(est, params, mc);
            }
        }
        Ok(eps.iter().map(|&e| self.get(e, params, mc).expect("filled above")).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Estimate of `1 - xi Q`.
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub q_hat: f64,
    /// One-sided 95% lower confidence bound for `Q`.
    pub q_hat_lower95: f64,
    /// `(ln eps, ln hat a_eps)`.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares fit of `ln hat a_eps` against `ln eps`.
pub fn fit_exponent(estimates: &[MedianEstimate], params: &Params) -> Result<ExponentFit> {
    let mut eps: Vec<f64> = estimates.iter().map(|e| e.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 2 {
        return Err(LfppError::DegenerateFit("all epsilon values are equal".into()));
    }
    if estimates.len() < 4 || eps.len() < 4 {
        return Err(LfppError::DegenerateFit(format!("need 4 distinct scales, got {}", eps.len())));
    }
    if eps[eps.len() - 1] / eps[0] < 8.0 {
        return Err(LfppError::DegenerateFit("scales span less than a factor of 8".into()));
    }
    if estimates.iter().any(|e| !(e.median > 0.0 && e.median.is_finite())) {
        return Err(LfppError::DegenerateFit("medians must be positive and finite".into()));
    }
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (e.epsilon.ln(), e.median.ln())).collect();
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = stats::ols(&x, &y)?;
    let t = stats::t_quantile(0.95, (points.len() - 2) as f64);
    Ok(ExponentFit {
        slope: fit.slope,
        intercept: fit.intercept,
        stderr_slope: fit.stderr_slope,
        q_hat: (1.0 - fit.slope) / params.xi,
        q_hat_lower95: (1.0 - fit.slope - t * fit.stderr_slope) / params.xi,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub epsilon: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub r: f64,
    pub rows: Vec<RatioRow>,
    pub q_hat_used: f64,
    /// Whether `hat a_eps` and `hat a_{eps/r}` came from the same trials.
    pub common_random_numbers: bool,
}

/// `rho(eps, r) = r^{1 - xi q} hat a_{eps/r} / hat a_eps` from a table of medians.
pub fn ratio_from_medians(r: f64, xi: f64, q_hat: f64, a_eps: f64, a_scaled: f64) -> f64 {
    r.powf(1.0 - xi * q_hat) * a_scaled / a_eps
}

fn check_dyadic(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite() && r.log2().fract() == 0.0) {
        return Err(LfppError::InvalidArgument(format!("scale factor {r} is not a power of two")));
    }
    Ok(())
}

/// Scaling ratios along `eps_ladder`. All medians come from one shared-trial pass per missing
/// scale set, so `hat a_eps` and `hat a_{eps/r}` use common random numbers.
pub fn scaling_ratio(
    eps_ladder: &[f64],
    r: f64,
    params: &Params,
    mc: &MCConfig,
    q_hat: f64,
    cache: &EstimateCache,
) -> Result<RatioSeries> {
    check_dyadic(r)?;
    if !q_hat.is_finite() {
        return Err(LfppError::InvalidArgument("q_hat must be finite".into()));
    }
    let mut all: Vec<f64> = eps_ladder.iter().flat_map(|&e| [e, e / r]).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    check_ladder(&all, mc)?;
    let table = cache.ladder(&all, params, mc)?;
    let find = |e: f64| table.iter().find(|t| t.epsilon == e).expect("computed").median;
    let rows = eps_ladder
        .iter()
        .map(|&e| RatioRow { epsilon: e, rho: ratio_from_medians(r, params.xi, q_hat, find(e), find(e / r)) })
        .collect();
    Ok(RatioSeries { r, rows, q_hat_used: q_hat, common_random_numbers: true })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCorrectionRow {
    pub epsilon: f64,
    /// `hat a_eps / eps^{1 - xi q}`.
    pub s: f64,
    /// `s (log 1/eps)^{-b}`.
    pub upper_term: f64,
    /// `s (log 1/eps)^{b}`.
    pub lower_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCorrectionReport {
    pub b: f64,
    pub q_hat_used: f64,
    pub rows: Vec<LogCorrectionRow>,
    pub upper: f64,
    pub lower: f64,
    /// Smallest `C >= 1` with `C^{-1} (log)^{-b} <= s <= C (log)^{b}` on the ladder.
    pub c: f64,
    pub upper_trend: Trend,
    pub lower_trend: Trend,
    pub passes: bool,
}

/// Two-sided log-correction envelope around the fitted power law.
///
/// `C` always exists on a finite ladder, so the check fails only when the envelope visibly
/// degrades toward small `eps`: the upper term trending up, or the lower term trending down,
/// in `log 1/eps` at the fixed trend level.
pub fn log_correction_check(
    estimates: &[MedianEstimate],
    params: &Params,
    b: f64,
    q_hat: f64,
) -> Result<LogCorrectionReport> {
    if !(b > 0.0) {
        return Err(LfppError::InvalidArgument(format!("b = {b} must be positive")));
    }
    let mut ests = estimates.to_vec();
    ests.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    if ests.iter().any(|e| !(e.epsilon < 1.0)) {
        return Err(LfppError::InvalidArgument("log correction needs eps < 1".into()));
    }
    let rows: Vec<LogCorrectionRow> = ests
        .iter()
        .map(|e| {
            let s = e.median / e.epsilon.powf(1.0 - params.xi * q_hat);
            let l = (1.0 / e.epsilon).ln();
            LogCorrectionRow { epsilon: e.epsilon, s, upper_term: s * l.powf(-b), lower_term: s * l.powf(b) }
        })
        .collect();
    let upper = rows.iter().map(|r| r.upper_term).fold(f64::NEG_INFINITY, f64::max);
    let lower = rows.iter().map(|r| r.lower_term).fold(f64::INFINITY, f64::min);
    let c = upper.max(1.0 / lower).max(1.0);
    let logs: Vec<f64> = rows.iter().map(|r| (1.0 / r.epsilon).ln()).collect();
    let upper_trend = stats::spearman_trend(&logs, &rows.iter().map(|r| r.upper_term).collect::<Vec<_>>())?;
    let lower_trend = stats::spearman_trend(&logs, &rows.iter().map(|r| r.lower_term).collect::<Vec<_>>())?;
    let passes = c.is_finite() && !upper_trend.significantly_increasing() && !lower_trend.significantly_decreasing();
    Ok(LogCorrectionReport { b, q_hat_used: q_hat, rows, upper, lower, c, upper_trend, lower_trend, passes })
}
