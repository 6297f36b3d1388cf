//! JSON configurations for the named experiments. Missing fields take the defaults below and
//! the resolved configuration is echoed into the report under `config`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LfppError, Result};
use crate::gff::{sample_torus_gff, FieldSample, Params};
use crate::lattice::{LatticeSpec, Point};
use crate::renorm::{EstimateCache, MCConfig};

use super::{
    annulus_event_stats, convergence_diagnostic, field_continuity_check, field_sup_bound_check, gmc_mass,
    localized_gap, random_pairs, scale_covariance_test, small_segment_sup, weyl_shift_test, AnnulusEventOptions,
    ExperimentReport,
};

pub const EXPERIMENT_NAMES: [&str; 9] = [
    "weyl_shift",
    "scale_covariance",
    "localized_gap",
    "convergence",
    "annulus_events",
    "gmc_mass",
    "field_continuity",
    "field_sup_bound",
    "small_segment",
];

/// Lattice and seed of a torus field. `spacing` defaults to `4/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { n: d_n(), spacing: None, seed: d_seed() }
    }
}

impl FieldConfig {
    pub fn spec(&self) -> Result<LatticeSpec> {
        match self.spacing {
            Some(s) => LatticeSpec::centered(self.n, s),
            None => LatticeSpec::auto(self.n),
        }
    }

    pub fn sample(&self) -> Result<FieldSample> {
        sample_torus_gff(&self.spec()?, self.seed)
    }
}

/// Monte Carlo settings for median normalizations and trial loops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { n: d_n(), spacing: None, trials: d_trials(), seed: d_seed() }
    }
}

impl McSettings {
    pub fn to_mc(&self) -> Result<MCConfig> {
        let spec = FieldConfig { n: self.n, spacing: self.spacing, seed: self.seed }.spec()?;
        Ok(MCConfig::new(self.trials, self.seed, spec))
    }
}

fn d_n() -> usize {
    256
}
fn d_seed() -> u64 {
    1
}
fn d_trials() -> usize {
    20
}
fn d_xi() -> f64 {
    0.2
}
fn d_eps() -> f64 {
    0.0625
}
fn d_ladder() -> Vec<f64> {
    vec![0.125, 0.0625, 0.03125, 0.015625]
}
fn d_unit() -> [f64; 4] {
    [0.0, 0.0, 1.0, 1.0]
}
fn d_wide() -> [f64; 4] {
    [-0.25, -0.25, 1.25, 1.25]
}

fn window(w: [f64; 4]) -> (Point, Point) {
    (Point::new(w[0], w[1]), Point::new(w[2], w[3]))
}

/// Field perturbation for the shift test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Shift {
    Constant {
        c: f64,
    },
    /// `amplitude * sin(2 pi k x) * sin(2 pi k y)`.
    Sine {
        amplitude: f64,
        k: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeylConfig {
    #[serde(default)]
    field: FieldConfig,
    #[serde(default = "d_eps")]
    epsilon: f64,
    #[serde(default = "d_xi")]
    xi: f64,
    #[serde(default = "d_shift")]
    shift: Shift,
    #[serde(default = "d_20")]
    pairs: usize,
    #[serde(default = "d_seed")]
    pair_seed: u64,
}
fn d_shift() -> Shift {
    Shift::Constant { c: 1.0 }
}
fn d_20() -> usize {
    20
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleConfig {
    #[serde(default)]
    mc: McSettings,
    #[serde(default = "d_two")]
    a: f64,
    #[serde(default = "d_eps")]
    epsilon: f64,
    #[serde(default = "d_xi")]
    xi: f64,
    q_hat: f64,
    #[serde(default = "d_z")]
    z: [f64; 2],
    #[serde(default = "d_w")]
    w: [f64; 2],
}
fn d_two() -> f64 {
    2.0
}
fn d_z() -> [f64; 2] {
    [0.25, 0.25]
}
fn d_w() -> [f64; 2] {
    [0.5, 0.5]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalizedConfig {
    #[serde(default)]
    field: FieldConfig,
    #[serde(default = "d_ladder")]
    eps_ladder: Vec<f64>,
    #[serde(default = "d_unit")]
    window: [f64; 4],
    #[serde(default = "d_xi")]
    xi: f64,
    #[serde(default = "d_50")]
    pairs: usize,
    #[serde(default = "d_seed")]
    pair_seed: u64,
}
fn d_50() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergenceConfig {
    #[serde(default)]
    mc: McSettings,
    #[serde(default = "d_seed")]
    field_seed: u64,
    #[serde(default = "d_10")]
    pairs: usize,
    #[serde(default = "d_seed")]
    pair_seed: u64,
    #[serde(default = "d_ladder")]
    eps_ladder: Vec<f64>,
    #[serde(default = "d_wide")]
    window: [f64; 4],
    #[serde(default = "d_xi")]
    xi: f64,
}
fn d_10() -> usize {
    10
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnulusConfig {
    #[serde(default)]
    mc: McSettings,
    #[serde(default = "d_eps")]
    epsilon: f64,
    #[serde(default = "d_proxy")]
    proxy_epsilon: f64,
    #[serde(default = "d_radii")]
    r_set: Vec<f64>,
    #[serde(default = "d_alpha")]
    alpha: f64,
    #[serde(default = "d_xi")]
    xi: f64,
    #[serde(default = "d_center")]
    center: [f64; 2],
    /// Normalize `ratio1` by Monte Carlo medians computed with `mc`.
    #[serde(default)]
    normalize: bool,
    #[serde(default)]
    constant_field: Option<f64>,
}
fn d_proxy() -> f64 {
    0.03125
}
fn d_radii() -> Vec<f64> {
    vec![0.25]
}
fn d_alpha() -> f64 {
    0.9
}
fn d_center() -> [f64; 2] {
    [0.5, 0.5]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GmcConfig {
    #[serde(default)]
    field: FieldConfig,
    #[serde(default = "d_gamma")]
    gamma: f64,
    #[serde(default = "d_gmc_ladder")]
    eps_ladder: Vec<f64>,
    #[serde(default = "d_unit")]
    window: [f64; 4],
}
fn d_gamma() -> f64 {
    1.0
}
fn d_gmc_ladder() -> Vec<f64> {
    vec![0.125, 0.0625, 0.03125, 0.015625, 0.0078125]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContinuityConfig {
    #[serde(default)]
    field: FieldConfig,
    #[serde(default = "d_one")]
    a: f64,
    #[serde(default = "d_n_ladder")]
    n_ladder: Vec<u32>,
    #[serde(default = "d_unit")]
    window: [f64; 4],
}
fn d_one() -> f64 {
    1.0
}
fn d_n_ladder() -> Vec<u32> {
    (4..=12).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupBoundConfig {
    #[serde(default)]
    field: FieldConfig,
    #[serde(default = "d_ladder")]
    eps_ladder: Vec<f64>,
    #[serde(default = "d_eta")]
    eta: f64,
    #[serde(default = "d_unit")]
    window: [f64; 4],
}
fn d_eta() -> f64 {
    0.1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SmallSegmentConfig {
    #[serde(default)]
    field: FieldConfig,
    /// Median normalizations; the lattice must match `field`.
    #[serde(default)]
    mc: McSettings,
    #[serde(default = "d_ladder")]
    eps_ladder: Vec<f64>,
    #[serde(default = "d_zeta")]
    zeta: f64,
    #[serde(default = "d_unit")]
    window: [f64; 4],
    #[serde(default = "d_xi")]
    xi: f64,
    #[serde(default = "d_100")]
    pairs: usize,
    #[serde(default = "d_seed")]
    pair_seed: u64,
}
fn d_zeta() -> f64 {
    0.5
}
fn d_100() -> usize {
    100
}

fn parse<T: DeserializeOwned>(name: &str, config: Value) -> Result<T> {
    serde_json::from_value(config).map_err(|e| LfppError::InvalidArgument(format!("{name} config: {e}")))
}

/// Run experiment `name` with a JSON configuration object (`{}` for all defaults).
pub fn run_named(name: &str, config: Value) -> Result<ExperimentReport> {
    let config = if config.is_null() { Value::Object(Default::default()) } else { config };
    let (mut rep, resolved) = match name {
        "weyl_shift" => {
            let c: WeylConfig = parse(name, config)?;
            let field = c.field.sample()?;
            let pairs = random_pairs(c.pair_seed, c.pairs, Point::new(0.0, 0.0), Point::new(1.0, 1.0), None);
            let params = Params::new(c.xi)?;
            let rep = match c.shift {
                Shift::Constant { c: v } => weyl_shift_test(&field, c.epsilon, |_| v, (v, v), &pairs, &params)?,
                Shift::Sine { amplitude, k } => {
                    let t = std::f64::consts::TAU * k;
                    let f = |p: Point| amplitude * (t * p.x).sin() * (t * p.y).sin();
                    let b = amplitude.abs();
                    weyl_shift_test(&field, c.epsilon, f, (-b, b), &pairs, &params)?
                }
            };
            (rep, serde_json::to_value(&c))
        }
        "scale_covariance" => {
            let c: ScaleConfig = parse(name, config)?;
            let pair = (Point::new(c.z[0], c.z[1]), Point::new(c.w[0], c.w[1]));
            let rep = scale_covariance_test(
                c.a,
                c.epsilon,
                &Params::new(c.xi)?,
                &c.mc.to_mc()?,
                c.q_hat,
                pair,
                &EstimateCache::new(),
            )?;
            (rep, serde_json::to_value(&c))
        }
        "localized_gap" => {
            let c: LocalizedConfig = parse(name, config)?;
            let rep = localized_gap(
                &c.field.sample()?,
                &c.eps_ladder,
                window(c.window),
                &Params::new(c.xi)?,
                c.pairs,
                c.pair_seed,
            )?;
            (rep, serde_json::to_value(&c))
        }
        "convergence" => {
            let c: ConvergenceConfig = parse(name, config)?;
            let pairs = random_pairs(c.pair_seed, c.pairs, Point::new(0.0, 0.0), Point::new(1.0, 1.0), None);
            let rep = convergence_diagnostic(
                c.field_seed,
                &pairs,
                &c.eps_ladder,
                window(c.window),
                &Params::new(c.xi)?,
                &c.mc.to_mc()?,
                &EstimateCache::new(),
            )?;
            (rep, serde_json::to_value(&c))
        }
        "annulus_events" => {
            let c: AnnulusConfig = parse(name, config)?;
            let params = Params::new(c.xi)?;
            let mc = c.mc.to_mc()?;
            let normalization = if c.normalize {
                let est = EstimateCache::new().ladder(&[c.epsilon, c.proxy_epsilon], &params, &mc)?;
                Some((est[0].median, est[1].median))
            } else {
                None
            };
            let opts = AnnulusEventOptions {
                center: Point::new(c.center[0], c.center[1]),
                proxy_epsilon: c.proxy_epsilon,
                normalization,
                constant_field: c.constant_field,
            };
            let rep = annulus_event_stats(c.epsilon, &c.r_set, c.alpha, &params, &mc, &opts)?;
            (rep, serde_json::to_value(&c))
        }
        "gmc_mass" => {
            let c: GmcConfig = parse(name, config)?;
            let rep = gmc_mass(&c.field.sample()?, c.gamma, &c.eps_ladder, window(c.window))?;
            (rep, serde_json::to_value(&c))
        }
        "field_continuity" => {
            let c: ContinuityConfig = parse(name, config)?;
            let rep = field_continuity_check(&c.field.sample()?, c.a, &c.n_ladder, window(c.window))?;
            (rep, serde_json::to_value(&c))
        }
        "field_sup_bound" => {
            let c: SupBoundConfig = parse(name, config)?;
            let rep = field_sup_bound_check(&c.field.sample()?, &c.eps_ladder, c.eta, window(c.window))?;
            (rep, serde_json::to_value(&c))
        }
        "small_segment" => {
            let c: SmallSegmentConfig = parse(name, config)?;
            let field = c.field.sample()?;
            let params = Params::new(c.xi)?;
            let mc = c.mc.to_mc()?;
            if mc.lattice != field.spec {
                return Err(LfppError::InvalidArgument("mc lattice must match the field lattice".into()));
            }
            let a_hat = EstimateCache::new().ladder(&c.eps_ladder, &params, &mc)?;
            let rep = small_segment_sup(
                &field,
                &c.eps_ladder,
                c.zeta,
                window(c.window),
                &params,
                &a_hat,
                c.pairs,
                c.pair_seed,
            )?;
            (rep, serde_json::to_value(&c))
        }
        other => {
            return Err(LfppError::InvalidArgument(format!(
                "unknown experiment {other:?}; expected one of {}",
                EXPERIMENT_NAMES.join(", ")
            )))
        }
    };
    rep.params.insert("config".into(), resolved.expect("configs serialize"));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_and_field_are_rejected() {
        assert!(matches!(run_named("nope", Value::Null), Err(LfppError::InvalidArgument(_))));
        let bad = serde_json::json!({"gamma": 1.0, "bogus": 2});
        assert!(matches!(run_named("gmc_mass", bad), Err(LfppError::InvalidArgument(_))));
    }

    #[test]
    fn defaults_are_echoed() {
        let cfg = serde_json::json!({"field": {"n": 128}, "eps_ladder": [0.25, 0.125, 0.0625]});
        let rep = run_named("field_sup_bound", cfg).unwrap();
        assert_eq!(rep.params["config"]["eta"], 0.1);
        assert_eq!(rep.params["config"]["field"]["seed"], 1);
        assert_eq!(rep.rows.len(), 3);
    }
}
