//! Gaussian free field samples and their mollifications.
//!
//! Fields use the log-correlated normalization `Cov(h(x), h(y)) ~ -log|x - y|`, so that
//! `Var h*_eps(z) = log(1/eps) + O(1)` and `eps^{gamma^2/2} e^{gamma h*_eps}` has a
//! nondegenerate limit.

mod fft;
pub mod io;
mod kernel;
mod mollify;
mod ops;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{LfppError, Result};
use crate::lattice::{LatticeSpec, SiteRect};

pub use kernel::{bump, heat_kernel, normalizer_z, LocalizedKernel};
pub use mollify::{mollify, mollify_localized, mollify_localized_window, Mollifier};
pub use ops::{add_function, bilinear, circle_average, rescale_field, shift};
pub use sample::{sample_dirichlet_gff, sample_torus_gff};

/// Reference value of the critical LFPP parameter.
pub const XI_CRIT_REF: f64 = 0.41;

/// Model parameters: the LFPP coupling `xi` and, for area-measure runs, `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Params {
    pub xi: f64,
    pub gamma: Option<f64>,
    pub xi_crit_ref: f64,
    /// Set when `xi >= XI_CRIT_REF`; the convergence results do not cover that regime.
    pub supercritical: bool,
}

impl Params {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(LfppError::InvalidArgument(format!("xi = {xi} must be positive")));
        }
        Ok(Self { xi, gamma: None, xi_crit_ref: XI_CRIT_REF, supercritical: xi >= XI_CRIT_REF })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(LfppError::InvalidArgument(format!("gamma = {gamma} must lie in (0, 2)")));
        }
        self.gamma = Some(gamma);
        Ok(self)
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            xi: f64,
            #[serde(default)]
            gamma: Option<f64>,
        }
        let raw = Raw::deserialize(d)?;
        let p = Params::new(raw.xi).map_err(serde::de::Error::custom)?;
        match raw.gamma {
            Some(g) => p.with_gamma(g).map_err(serde::de::Error::custom),
            None => Ok(p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Zero-mean GFF on the periodic `n x n` torus, standing in for the whole-plane field.
    TorusWholePlane,
    /// Zero-boundary GFF on the square with corners at sites `(0,0)` and `(n-1,n-1)`.
    DirichletSquare,
}

/// A lattice realization of a field `h`, row-major with `values[iy * n + ix]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub spec: LatticeSpec,
    pub values: Vec<f64>,
    pub kind: FieldKind,
    pub seed: u64,
    pub mean_removed: bool,
    /// True when the values were produced from a sampled field by a deterministic map.
    pub derived: bool,
}

impl FieldSample {
    /// Wrap externally produced values, e.g. a deterministic test field.
    pub fn from_values(spec: LatticeSpec, kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(LfppError::InvalidArgument(format!("expected {} values, got {}", spec.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LfppError::InvalidArgument("field values must be finite".into()));
        }
        Ok(Self { spec, values, kind, seed: 0, mean_removed: false, derived: true })
    }

    pub fn constant(spec: LatticeSpec, c: f64) -> Self {
        Self {
            spec,
            values: vec![c; spec.len()],
            kind: FieldKind::TorusWholePlane,
            seed: 0,
            mean_removed: false,
            derived: true,
        }
    }

    #[inline]
    pub fn at(&self, site: (usize, usize)) -> f64 {
        self.values[self.spec.linear(site)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `h*_eps` (heat-kernel mollification) or its localized truncation, on the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifiedField {
    pub spec: LatticeSpec,
    pub epsilon: f64,
    /// Row-major over the full lattice; only sites inside `coverage` carry mollified values.
    pub values: Vec<f64>,
    pub localized: bool,
    /// Lattice normalizer `Z_eps`; 1 for the untruncated kernel.
    pub z_epsilon: f64,
    pub source_seed: u64,
    pub coverage: SiteRect,
}

impl MollifiedField {
    /// Mollified values given directly, e.g. for metric tests on synthetic environments.
    pub fn from_values(spec: LatticeSpec, epsilon: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(LfppError::InvalidArgument(format!("expected {} values, got {}", spec.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LfppError::InvalidArgument("mollified values must be finite".into()));
        }
        Ok(Self { spec, epsilon, values, localized: false, z_epsilon: 1.0, source_seed: 0, coverage: spec.full_rect() })
    }

    #[inline]
    pub fn at(&self, site: (usize, usize)) -> f64 {
        self.values[self.spec.linear(site)]
    }

    /// Add `f` (evaluated at sites) to the mollified values.
    pub fn add_values(&self, f: impl Fn(crate::lattice::Point) -> f64) -> MollifiedField {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v += f(self.spec.site_point(self.spec.site_of(i)));
        }
        out
    }

    /// Supremum of `|values|` over a site rectangle inside the coverage.
    pub fn sup_abs(&self, window: &SiteRect) -> Result<f64> {
        if !self.coverage.contains_rect(window) {
            return Err(LfppError::NotCovered);
        }
        Ok(window.sites().map(|s| self.at(s).abs()).fold(0.0, f64::max))
    }

    /// Supremum of `|self - other|` over a window covered by both.
    pub fn sup_gap(&self, other: &MollifiedField, window: &SiteRect) -> Result<f64> {
        if !self.coverage.contains_rect(window) || !other.coverage.contains_rect(window) {
            return Err(LfppError::NotCovered);
        }
        Ok(window.sites().map(|s| (self.at(s) - other.at(s)).abs()).fold(0.0, f64::max))
    }
}

pub(crate) fn check_epsilon(spec: &LatticeSpec, epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 2.0 * spec.spacing()) {
        return Err(LfppError::MollificationTooFine { epsilon, spacing: spec.spacing() });
    }
    Ok(())
}
