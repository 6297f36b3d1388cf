//! LFPP distances on the weighted 8-neighbor lattice.

mod annulus;
mod dist;
mod grid;
mod region;
mod search;

use serde::{Deserialize, Serialize};

use crate::lattice::Site;

pub use annulus::dist_around_annulus;
pub use dist::{dist_internal, dist_point, dist_sets, lr_crossing};
pub use grid::{build_weighted_grid, WeightedGrid, NEIGHBOR_OFFSETS};
pub use region::{Annulus, Region, SiteSet};

/// A graph distance; `Infinite` across components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Distance::Finite(v) => Some(*v),
            Distance::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    /// `f64::INFINITY` for `Infinite`; convenient for tables.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Lattice path with its weighted length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub sites: Vec<Site>,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistResult {
    pub value: Distance,
    pub path: Option<Path>,
    /// Settled nodes, summed over all searches.
    pub settled: usize,
}

impl DistResult {
    fn unreachable(settled: usize) -> Self {
        Self { value: Distance::Infinite, path: None, settled }
    }
}
