use rayon::prelude::*;

use crate::error::{LfppError, Result};
use crate::gff::{mollify, rescale_field, sample_torus_gff, Params};
use crate::lattice::{LatticeSpec, Point};
use crate::metric::{build_weighted_grid, dist_point, Region};
use crate::renorm::{EstimateCache, MCConfig};
use crate::seed::split;
use crate::stats;

use super::{timed, ExperimentReport, PointPair, Verdict, TWO_SAMPLE_ALPHA};

fn whole_lattice(spec: &LatticeSpec) -> Region {
    let o = spec.origin();
    let far = (spec.n() - 1) as f64 * spec.spacing();
    Region::rect(o, Point::new(o.x + far, o.y + far))
}

/// Two-sample check of the exact LFPP scaling relation in law.
///
/// Trial `i` samples `h` with seed `split(master_seed, i)` and records
/// `lhs = D^eps_h(a z, a w) / a_eps` and
/// `rhs = a^{1 - xi q} (a_{eps/a} / a_eps) D^{eps/a}_{h(a.) + q log a}(z, w) / a_{eps/a}`,
/// with medians `a_eps` taken from `cache` (filled on demand with `mc`).
pub fn scale_covariance_test(
    a: f64,
    epsilon: f64,
    params: &Params,
    mc: &MCConfig,
    q_hat: f64,
    pair: PointPair,
    cache: &EstimateCache,
) -> Result<ExperimentReport> {
    if !(a > 0.0 && a.log2().fract() == 0.0) {
        return Err(LfppError::InvalidArgument(format!("scale a = {a} is not dyadic")));
    }
    let spec = mc.lattice;
    let mut rep = ExperimentReport::new("scale_covariance", &["trial", "lhs", "rhs"]);
    rep.param("a", a);
    rep.param("epsilon", epsilon);
    rep.param("xi", params.xi);
    rep.param("q_hat", q_hat);
    rep.param("trials", mc.trials);
    rep.param("master_seed", mc.master_seed);
    rep.param("n", spec.n());
    rep.param("spacing", spec.spacing());
    rep.param("z", [pair.0.x, pair.0.y]);
    rep.param("w", [pair.1.x, pair.1.y]);

    let ((lhs, rhs, a_eps, a_scaled, prefactor), secs) = timed(|| {
        let ladder = cache.ladder(&[epsilon, epsilon / a], params, mc)?;
        let (a_eps, a_scaled) = (ladder[0].median, ladder[1].median);
        let prefactor = a.powf(1.0 - params.xi * q_hat) * a_scaled / a_eps;
        let region = whole_lattice(&spec);
        let (z, w) = pair;
        let (az, aw) = (Point::new(a * z.x, a * z.y), Point::new(a * w.x, a * w.y));
        let trial = |i: usize| -> Result<(f64, f64)> {
            let h = sample_torus_gff(&spec, split(mc.master_seed, i as u64))?;
            let g0 = build_weighted_grid(&mollify(&h, epsilon)?, params.xi, &region)?;
            let lhs = dist_point(&g0, az, aw, false)?.value.to_f64() / a_eps;
            let scaled = rescale_field(&h, a, Point::new(0.0, 0.0), q_hat)?;
            let g1 = build_weighted_grid(&mollify(&scaled, epsilon / a)?, params.xi, &region)?;
            let rhs = prefactor * (dist_point(&g1, z, w, false)?.value.to_f64() / a_scaled);
            Ok((lhs, rhs))
        };
        let out: Vec<(f64, f64)> = if mc.parallel {
            (0..mc.trials).into_par_iter().map(trial).collect::<Result<_>>()?
        } else {
            (0..mc.trials).map(trial).collect::<Result<_>>()?
        };
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = out.into_iter().unzip();
        Ok((lhs, rhs, a_eps, a_scaled, prefactor))
    })?;
    for (i, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
        rep.push(vec![i as f64, *l, *r]);
    }
    let iqr = |x: &[f64]| stats::quantile(x, 0.75) - stats::quantile(x, 0.25);
    let mw = stats::mann_whitney(&lhs, &rhs)?;
    rep.meta("median_lhs", stats::median(&lhs));
    rep.meta("median_rhs", stats::median(&rhs));
    rep.meta("iqr_lhs", iqr(&lhs));
    rep.meta("iqr_rhs", iqr(&rhs));
    rep.meta("mann_whitney_u", mw.u);
    rep.meta("mann_whitney_p", mw.p_two_sided);
    rep.meta("rejects_equality_at_1pct", mw.p_two_sided < TWO_SAMPLE_ALPHA);
    rep.meta("q_hat_used", q_hat);
    rep.meta("a_eps", a_eps);
    rep.meta("a_eps_over_a", a_scaled);
    rep.meta("prefactor", prefactor);
    rep.meta("pairing", "same field seed on both sides");
    rep.verdict = Verdict::Informational;
    rep.runtime_secs = secs;
    Ok(rep)
}
