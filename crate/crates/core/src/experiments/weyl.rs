use crate::error::{LfppError, Result};
use crate::gff::{add_function, mollify_localized_window, FieldSample, Params};
use crate::lattice::Point;
use crate::metric::{build_weighted_grid, dist_point, Region};

use super::{timed, ExperimentReport, PointPair, Verdict};

/// Relative tolerance for the constant-shift identity.
pub const WEYL_TOLERANCE: f64 = 1e-10;

/// Distances before and after adding `f` to the field, localized mollification at `epsilon`,
/// on the unit square. `f_bounds` are the bounds of `f`; equal bounds mean a constant shift,
/// checked as the identity `d' = e^{xi c} d`, otherwise every ratio must lie in
/// `[e^{xi min f}, e^{xi max f}]`.
pub fn weyl_shift_test(
    field: &FieldSample,
    epsilon: f64,
    f: impl Fn(Point) -> f64,
    f_bounds: (f64, f64),
    pairs: &[PointPair],
    params: &Params,
) -> Result<ExperimentReport> {
    let (lo, hi) = f_bounds;
    if !(lo <= hi) {
        return Err(LfppError::InvalidArgument(format!("bounds {lo} > {hi}")));
    }
    let square = Region::unit_square();
    let inside = |p: &Point| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y);
    if let Some(p) = pairs.iter().find(|(z, w)| !inside(z) || !inside(w)) {
        return Err(LfppError::OutOfDomain(format!("pair {p:?} leaves the unit square")));
    }
    let mut rep = ExperimentReport::new(
        "weyl_shift",
        &["pair", "zx", "zy", "wx", "wy", "d", "d_shifted", "ratio", "ratio_lo", "ratio_hi"],
    );
    rep.param("epsilon", epsilon);
    rep.param("xi", params.xi);
    rep.param("f_min", lo);
    rep.param("f_max", hi);
    rep.param("pairs", pairs.len());
    rep.param("field_seed", field.seed);

    let (ok, secs) = timed(|| {
        let window = square.resolve(&field.spec)?.rect;
        let shifted = add_function(field, &f)?;
        let m0 = mollify_localized_window(field, epsilon, window)?;
        let m1 = mollify_localized_window(&shifted, epsilon, window)?;
        let g0 = build_weighted_grid(&m0, params.xi, &square)?;
        let g1 = build_weighted_grid(&m1, params.xi, &square)?;
        let (r_lo, r_hi) = ((params.xi * lo).exp(), (params.xi * hi).exp());
        let mut ok = true;
        for (i, (z, w)) in pairs.iter().enumerate() {
            let d0 = dist_point(&g0, *z, *w, false)?.value.to_f64();
            let d1 = dist_point(&g1, *z, *w, false)?.value.to_f64();
            let ratio = d1 / d0;
            if d0 > 0.0 {
                ok &= if lo == hi {
                    (ratio / r_lo - 1.0).abs() <= WEYL_TOLERANCE
                } else {
                    ratio >= r_lo * (1.0 - 1e-12) && ratio <= r_hi * (1.0 + 1e-12)
                };
            }
            rep.push(vec![i as f64, z.x, z.y, w.x, w.y, d0, d1, ratio, r_lo, r_hi]);
        }
        Ok(ok)
    })?;
    rep.meta("mode", if lo == hi { "constant_identity" } else { "bounded_sandwich" });
    rep.meta("tolerance", WEYL_TOLERANCE);
    rep.verdict = Verdict::from_bool(ok);
    rep.runtime_secs = secs;
    Ok(rep)
}
