use crate::error::Result;
use crate::gff::{mollify_localized_window, FieldSample, Mollifier, Params};
use crate::lattice::Point;
use crate::metric::{build_weighted_grid, dist_point, Region};

use super::{nonincreasing_with_slack, random_pairs, timed, ExperimentReport, Verdict};

/// Gap between the heat-kernel and localized mollifications along an `eps` ladder, as a sup
/// norm over `window` and through distance ratios `hat D / D` at `n_pairs` random pairs.
pub fn localized_gap(
    field: &FieldSample,
    eps_ladder: &[f64],
    window: (Point, Point),
    params: &Params,
    n_pairs: usize,
    pair_seed: u64,
) -> Result<ExperimentReport> {
    let (lo, hi) = window;
    let mut rep = ExperimentReport::new(
        "localized_gap",
        &["epsilon", "sup_gap", "max_ratio_dev", "ratio_min", "ratio_max", "weyl_lo", "weyl_hi"],
    );
    rep.param("eps_ladder", eps_ladder);
    rep.param("window", [lo.x, lo.y, hi.x, hi.y]);
    rep.param("xi", params.xi);
    rep.param("pairs", n_pairs);
    rep.param("pair_seed", pair_seed);
    rep.param("field_seed", field.seed);

    let (sandwich, secs) = timed(|| {
        let region = Region::rect(lo, hi);
        let rect = region.resolve(&field.spec)?.rect;
        let pairs = random_pairs(pair_seed, n_pairs, lo, hi, None);
        let mollifier = Mollifier::new(field);
        let mut sandwich = true;
        for &e in eps_ladder {
            let full = mollifier.mollify(e)?;
            let loc = mollify_localized_window(field, e, rect)?;
            let gap = loc.sup_gap(&full, &rect)?;
            let g_full = build_weighted_grid(&full, params.xi, &region)?;
            let g_loc = build_weighted_grid(&loc, params.xi, &region)?;
            let (mut dev, mut rmin, mut rmax) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
            for (z, w) in &pairs {
                let d = dist_point(&g_full, *z, *w, false)?.value.to_f64();
                if d == 0.0 {
                    continue;
                }
                let r = dist_point(&g_loc, *z, *w, false)?.value.to_f64() / d;
                dev = dev.max((r - 1.0).abs());
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
            let (wl, wh) = ((-params.xi * gap).exp(), (params.xi * gap).exp());
            sandwich &= rmin >= wl * (1.0 - 1e-12) && rmax <= wh * (1.0 + 1e-12);
            rep.push(vec![e, gap, dev, rmin, rmax, wl, wh]);
        }
        Ok(sandwich)
    })?;
    let gaps = rep.column("sup_gap").expect("column");
    let devs = rep.column("max_ratio_dev").expect("column");
    let gap_ok = nonincreasing_with_slack(&gaps, 0.05, 1);
    let dev_ok = nonincreasing_with_slack(&devs, 0.05, 1);
    rep.meta("sup_gap_nonincreasing", gap_ok);
    rep.meta("ratio_dev_nonincreasing", dev_ok);
    rep.meta("weyl_sandwich_holds", sandwich);
    rep.meta("monotonicity_rule", "at most one rise, each within 5% relative");
    rep.verdict = Verdict::from_bool(gap_ok && dev_ok);
    rep.runtime_secs = secs;
    Ok(rep)
}
