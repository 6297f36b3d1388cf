//! Verification harnesses. Each experiment is a pure function of its inputs and returns an
//! [`ExperimentReport`] whose verdict is computed from its own rows.

mod annulus;
mod config;
mod convergence;
mod field_bounds;
mod localized;
mod scale;
mod weyl;

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LfppError, Result};
use crate::lattice::{LatticeSpec, Point, SiteRect};
use crate::seed::{stream_rng, PAIRS_STREAM};
use crate::stats::{self, Trend};

pub use annulus::{annulus_event_stats, AnnulusEventOptions};
pub use config::{run_named, FieldConfig, EXPERIMENT_NAMES};
pub use convergence::{convergence_diagnostic, small_segment_sup};
pub use field_bounds::{continuity_bound, field_continuity_check, field_sup_bound_check, gmc_mass};
pub use localized::localized_gap;
pub use scale::scale_covariance_test;
pub use weyl::weyl_shift_test;

/// Significance level of the two-sample comparison.
pub const TWO_SAMPLE_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    /// One record per row, in `columns` order. Non-finite entries serialize as `null`.
    #[serde(with = "nullable_rows")]
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub runtime_secs: f64,
}

impl ExperimentReport {
    pub(crate) fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
            verdict: Verdict::Informational,
            runtime_secs: 0.0,
        }
    }

    pub(crate) fn param(&mut self, key: &str, v: impl Serialize) {
        self.params.insert(key.to_string(), serde_json::to_value(v).expect("serializable"));
    }

    pub(crate) fn meta(&mut self, key: &str, v: impl Serialize) {
        self.metadata.insert(key.to_string(), serde_json::to_value(v).expect("serializable"));
    }

    pub(crate) fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Rows as CSV with a header line; non-finite values are written as `nan`/`inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

mod nullable_rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<Option<f64>>> =
            rows.iter().map(|r| r.iter().map(|x| x.is_finite().then_some(*x)).collect()).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let v: Vec<Vec<Option<f64>>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|r| r.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect()).collect())
    }
}

/// A pair of plane points.
pub type PointPair = (Point, Point);

/// `count` pairs with both points in `[lo, hi]^2`, drawn from the pairs stream of `seed`.
/// With `max_sep`, the second point lies at a uniform distance in `(0, max_sep]` in a uniform
/// direction from the first, redrawn until it falls inside the box.
pub fn random_pairs(seed: u64, count: usize, lo: Point, hi: Point, max_sep: Option<f64>) -> Vec<PointPair> {
    let mut rng = stream_rng(seed, PAIRS_STREAM);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        Point::new(lo.x + (hi.x - lo.x) * rng.random::<f64>(), lo.y + (hi.y - lo.y) * rng.random::<f64>())
    };
    (0..count)
        .map(|_| loop {
            let z = draw(&mut rng);
            let w = match max_sep {
                None => draw(&mut rng),
                Some(s) => {
                    let r = s * (1.0 - rng.random::<f64>());
                    let t = std::f64::consts::TAU * rng.random::<f64>();
                    Point::new(z.x + r * t.cos(), z.y + r * t.sin())
                }
            };
            if w.x >= lo.x && w.x <= hi.x && w.y >= lo.y && w.y <= hi.y {
                break (z, w);
            }
        })
        .collect()
}

/// Sites `p` with `lo <= p < hi` coordinatewise, so that `area * spacing^2` is the plane area
/// of the box when its corners are lattice points.
pub fn cell_window(spec: &LatticeSpec, lo: Point, hi: Point) -> Result<SiteRect> {
    if !spec.contains_box(lo, hi) {
        return Err(LfppError::OutOfDomain(format!("window {lo:?}..{hi:?}")));
    }
    let half = 0.5 * spec.spacing();
    spec.rect_sites(lo, Point::new(hi.x - half, hi.y - half)).ok_or(LfppError::EmptyRegion)
}

/// Whether `values` never rise by more than `tol` (relative) between consecutive entries,
/// with at most `allowed` such rises.
pub fn nonincreasing_with_slack(values: &[f64], tol: f64, allowed: usize) -> bool {
    let mut inversions = 0;
    for w in values.windows(2) {
        if w[1] > w[0] {
            if w[1] > w[0] * (1.0 + tol) {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= allowed
}

/// Spearman trend of `values` against their position.
pub fn index_trend(values: &[f64]) -> Result<Trend> {
    let idx: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    stats::spearman_trend(&idx, values)
}

pub(crate) fn check_ladder_halving(eps: &[f64], min_rungs: usize) -> Result<()> {
    if eps.len() < min_rungs {
        return Err(LfppError::InvalidArgument(format!("ladder needs at least {min_rungs} rungs")));
    }
    for w in eps.windows(2) {
        if (w[1] * 2.0 - w[0]).abs() > 1e-12 * w[0] {
            return Err(LfppError::InvalidArgument(format!("ladder {eps:?} is not a halving sequence")));
        }
    }
    Ok(())
}

pub(crate) fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = std::time::Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}
