use std::f64::consts::SQRT_2;

use crate::error::{LfppError, Result};
use crate::gff::MollifiedField;
use crate::lattice::{LatticeSpec, Site, SiteRect};

use super::region::{Region, SiteSet};
use super::Path;

/// Neighbor offsets `(dx, dy)`, ordered by `(dy, dx)`.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] =
    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Site costs `exp(xi * h)` over a masked part of the lattice.
///
/// Immutable once built; queries only read it.
#[derive(Clone, Debug)]
pub struct WeightedGrid {
    spec: LatticeSpec,
    xi: f64,
    mask: SiteSet,
    /// Row-major over `mask.rect`.
    cost: Vec<f64>,
}

pub fn build_weighted_grid(moll: &MollifiedField, xi: f64, region: &Region) -> Result<WeightedGrid> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(LfppError::InvalidArgument(format!("xi must be positive, got {xi}")));
    }
    let mask = region.resolve(&moll.spec)?;
    if !moll.coverage.contains_rect(&mask.rect) {
        return Err(LfppError::NotCovered);
    }
    let cost: Vec<f64> = mask.rect.sites().map(|s| (xi * moll.at(s)).exp()).collect();
    if cost.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(LfppError::InvalidArgument("site cost overflow; field values too large for xi".into()));
    }
    Ok(WeightedGrid { spec: moll.spec, xi, mask, cost })
}

impl WeightedGrid {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn mask(&self) -> &SiteSet {
        &self.mask
    }

    pub fn contains(&self, s: Site) -> bool {
        self.mask.contains(s)
    }

    pub fn site_cost(&self, s: Site) -> Option<f64> {
        self.contains(s).then(|| self.cost[self.mask.rect.local(s)])
    }

    /// Trapezoid weight of the edge `u`-`v`; `None` unless both are masked 8-neighbors.
    pub fn edge_weight(&self, u: Site, v: Site) -> Option<f64> {
        let dx = u.0.abs_diff(v.0);
        let dy = u.1.abs_diff(v.1);
        if dx > 1 || dy > 1 || dx + dy == 0 || !self.contains(u) || !self.contains(v) {
            return None;
        }
        let r = &self.mask.rect;
        Some(self.weight(self.cost[r.local(u)], self.cost[r.local(v)], dx + dy == 2))
    }

    /// Masked neighbors with edge weights, in [`NEIGHBOR_OFFSETS`] order.
    pub fn neighbors(&self, s: Site) -> Vec<(Site, f64)> {
        let mut out = Vec::with_capacity(8);
        if !self.contains(s) {
            return out;
        }
        let r = self.mask.rect;
        self.expand_local(r.local(s), |_| true, &mut |j, w| out.push((r.site_of_local(j), w)));
        out
    }

    /// Weighted length of a site sequence, summed left to right.
    pub fn path_length(&self, sites: &[Site]) -> Result<f64> {
        let mut len = 0.0;
        for pair in sites.windows(2) {
            len += self.edge_weight(pair[0], pair[1]).ok_or(LfppError::OutOfRegion(pair[1]))?;
        }
        Ok(len)
    }

    pub(crate) fn path_from_local(&self, nodes: &[usize]) -> Path {
        let r = self.mask.rect;
        let sites: Vec<Site> = nodes.iter().map(|&j| r.site_of_local(j)).collect();
        let length = self.path_length(&sites).expect("search paths follow grid edges");
        Path { sites, length }
    }

    pub(crate) fn rect(&self) -> SiteRect {
        self.mask.rect
    }

    pub(crate) fn num_local(&self) -> usize {
        self.mask.rect.area()
    }

    pub(crate) fn local_masked(&self, j: usize) -> bool {
        self.mask.contains(self.mask.rect.site_of_local(j))
    }

    #[inline]
    fn weight(&self, cu: f64, cv: f64, diagonal: bool) -> f64 {
        let len = if diagonal { SQRT_2 } else { 1.0 };
        self.spec.spacing() * len * (cu + cv) * 0.5
    }

    /// Calls `f(j, w)` for every masked neighbor `j` of local node `i` with `allow(j)`.
    pub(crate) fn expand_local(&self, i: usize, allow: impl Fn(usize) -> bool, f: &mut impl FnMut(usize, f64)) {
        let r = self.mask.rect;
        let (w, h) = (r.width() as isize, r.height() as isize);
        let (x, y) = ((i % r.width()) as isize, (i / r.width()) as isize);
        let ci = self.cost[i];
        for (dx, dy) in NEIGHBOR_OFFSETS {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let j = (ny * w + nx) as usize;
            if !self.local_masked(j) || !allow(j) {
                continue;
            }
            f(j, self.weight(ci, self.cost[j], dx != 0 && dy != 0));
        }
    }
}
