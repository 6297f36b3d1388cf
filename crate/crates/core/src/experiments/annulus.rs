use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LfppError, Result};
use crate::gff::{mollify_localized_window, sample_torus_gff, FieldSample, Params};
use crate::lattice::Point;
use crate::metric::{build_weighted_grid, dist_around_annulus, dist_point, dist_sets, Annulus, Region, WeightedGrid};
use crate::renorm::MCConfig;
use crate::seed::split;
use crate::stats;

use super::{timed, ExperimentReport, Verdict};

/// Half-width of the thin rings standing in for boundary circles, in lattice spacings.
const RING_HALF_WIDTH: f64 = 0.75;
const QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusEventOptions {
    pub center: Point,
    /// Scale whose metric stands in for the limiting metric.
    pub proxy_epsilon: f64,
    /// `(a_eps, a_proxy)` used to normalize `ratio_1`; raw distances when absent.
    pub normalization: Option<(f64, f64)>,
    /// Replace every sampled field by this constant.
    pub constant_field: Option<f64>,
}

struct Measured {
    around: f64,
    across: f64,
    endpoints: Option<(Point, Point)>,
}

fn measure(grid: &WeightedGrid, ann: &Annulus, rings: &(Region, Region)) -> Result<Measured> {
    let around = dist_around_annulus(grid, ann)?.value.to_f64();
    let res = dist_sets(grid, &rings.0, &rings.1)?;
    let spec = grid.spec();
    let endpoints = res.path.as_ref().map(|p| {
        let (u, v) = (p.sites[0], *p.sites.last().expect("nonempty path"));
        (spec.site_point(u), spec.site_point(v))
    });
    Ok(Measured { around, across: res.value.to_f64(), endpoints })
}

/// Around/across ratios of annuli `A_{alpha r, r}(center)` for each `r`, at `epsilon` and at the
/// proxy scale, with the ratio of distances between the endpoints of the proxy geodesic
/// joining the two boundary circles. Boundary circles are rings of half-width 0.75 spacings.
///
/// Columns: `trial, r, ratio3_eps, ratio3_proxy, ratio1`. Quantiles go into the metadata.
pub fn annulus_event_stats(
    epsilon: f64,
    r_set: &[f64],
    alpha: f64,
    params: &Params,
    mc: &MCConfig,
    opts: &AnnulusEventOptions,
) -> Result<ExperimentReport> {
    if !(alpha > 0.875 && alpha < 1.0) {
        return Err(LfppError::InvalidArgument(format!("alpha = {alpha} must lie in (7/8, 1)")));
    }
    if r_set.is_empty() || r_set.iter().any(|r| !(*r > 0.0 && r.log2().fract() == 0.0)) {
        return Err(LfppError::InvalidArgument(format!("radii {r_set:?} must be dyadic")));
    }
    let spec = mc.lattice;
    let h = spec.spacing();
    let eps_pair = [epsilon, opts.proxy_epsilon];
    let mut rep = ExperimentReport::new("annulus_events", &["trial", "r", "ratio3_eps", "ratio3_proxy", "ratio1"]);
    rep.param("epsilon", epsilon);
    rep.param("r_set", r_set);
    rep.param("alpha", alpha);
    rep.param("xi", params.xi);
    rep.param("mc", mc);
    rep.param("options", opts);

    let c = opts.center;
    let geometry: Vec<(Annulus, (Region, Region), Region)> = r_set
        .iter()
        .map(|&r| {
            let ann = Annulus::new(c, alpha * r, r)?;
            let ring = |rad: f64| Region::annulus(c, rad - RING_HALF_WIDTH * h, rad + RING_HALF_WIDTH * h);
            Ok((ann, (ring(alpha * r)?, ring(r)?), Region::disk(c, r + 2.0 * h)))
        })
        .collect::<Result<_>>()?;

    let trial = |i: usize| -> Result<Vec<[f64; 3]>> {
        let field = match opts.constant_field {
            Some(v) => FieldSample::constant(spec, v),
            None => sample_torus_gff(&spec, split(mc.master_seed, i as u64))?,
        };
        let mut out = Vec::with_capacity(geometry.len());
        for (ann, rings, disk) in &geometry {
            let rect = disk.resolve(&spec)?.rect;
            let grids: Vec<WeightedGrid> = eps_pair
                .iter()
                .map(|&e| build_weighted_grid(&mollify_localized_window(&field, e, rect)?, params.xi, disk))
                .collect::<Result<_>>()?;
            let at_eps = measure(&grids[0], ann, rings)?;
            let proxy = measure(&grids[1], ann, rings)?;
            let ratio1 = match proxy.endpoints {
                Some((u, v)) => {
                    let de = dist_point(&grids[0], u, v, false)?.value.to_f64();
                    let dp = dist_point(&grids[1], u, v, false)?.value.to_f64();
                    let (ae, ap) = opts.normalization.unwrap_or((1.0, 1.0));
                    (de / ae) / (dp / ap)
                }
                None => f64::NAN,
            };
            out.push([at_eps.around / at_eps.across, proxy.around / proxy.across, ratio1]);
        }
        Ok(out)
    };

    let (per_trial, secs) = timed(|| {
        if mc.parallel {
            (0..mc.trials).into_par_iter().map(trial).collect::<Result<Vec<_>>>()
        } else {
            (0..mc.trials).map(trial).collect::<Result<Vec<_>>>()
        }
    })?;
    for (i, rows) in per_trial.iter().enumerate() {
        for (k, v) in rows.iter().enumerate() {
            rep.push(vec![i as f64, r_set[k], v[0], v[1], v[2]]);
        }
    }

    let mut summary = Vec::new();
    for (k, &r) in r_set.iter().enumerate() {
        let col = |j: usize| -> Vec<f64> { per_trial.iter().map(|t| t[k][j]).filter(|v| v.is_finite()).collect() };
        let q = |xs: Vec<f64>| -> Vec<f64> {
            if xs.is_empty() {
                return vec![f64::NAN; QUANTILES.len()];
            }
            QUANTILES.iter().map(|&p| stats::quantile(&xs, p)).collect()
        };
        summary.push(serde_json::json!({
            "r": r,
            "ratio3_eps_q50_q90_q99": q(col(0)),
            "ratio3_proxy_q50_q90_q99": q(col(1)),
            "ratio1_q50_q90_q99": q(col(2)),
        }));
    }
    rep.meta("quantiles", summary);
    rep.meta("proxy", format!("metric at eps = {} stands in for the limit", opts.proxy_epsilon));
    rep.meta("radii_grid", "dyadic radii supplementing powers of 8");
    rep.meta("ring_half_width_spacings", RING_HALF_WIDTH);
    rep.meta("normalized_ratio1", opts.normalization.is_some());
    rep.verdict = Verdict::Informational;
    rep.runtime_secs = secs;
    Ok(rep)
}
