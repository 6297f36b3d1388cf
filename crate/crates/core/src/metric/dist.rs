use crate::error::{LfppError, Result};
use crate::lattice::{Point, Site};

use super::grid::WeightedGrid;
use super::region::{Region, SiteSet};
use super::search::dijkstra;
use super::{DistResult, Distance};

/// Graph distance between the sites nearest to `z` and `w`.
///
/// The search always starts from the lexicographically smaller site, so the value is
/// bitwise symmetric in `z` and `w`.
pub fn dist_point(grid: &WeightedGrid, z: Point, w: Point, want_path: bool) -> Result<DistResult> {
    let a = masked_site(grid, z)?;
    let b = masked_site(grid, w)?;
    Ok(ordered_pair(grid, a, b, want_path, |_| true))
}

/// `inf` of the distance over pairs in `A x B`: one multi-source search from `A`.
pub fn dist_sets(grid: &WeightedGrid, a: &Region, b: &Region) -> Result<DistResult> {
    let sa = masked_sites(grid, a)?;
    let sb = masked_sites(grid, b)?;
    let sources: Vec<Site> = sa.sites().collect();
    Ok(run(grid, &sources, |s| sb.contains(s), |_| true))
}

/// Distance using only paths whose sites lie in `sub`.
pub fn dist_internal(grid: &WeightedGrid, z: Point, w: Point, sub: &Region) -> Result<DistResult> {
    let a = masked_site(grid, z)?;
    let b = masked_site(grid, w)?;
    let set = sub.resolve(grid.spec())?;
    for s in [a, b] {
        if !set.contains(s) {
            return Err(LfppError::OutOfRegion(s));
        }
    }
    Ok(ordered_pair(grid, a, b, true, |s| set.contains(s)))
}

/// Left-right crossing distance of a rectangle, with paths confined to it.
pub fn lr_crossing(grid: &WeightedGrid, square: &Region) -> Result<DistResult> {
    if !matches!(square, Region::Rect { .. }) {
        return Err(LfppError::InvalidArgument("crossing needs a rectangular region".into()));
    }
    let set = masked_sites(grid, square)?;
    let (x0, x1) = (set.rect.x0, set.rect.x1);
    let sources: Vec<Site> = set.sites().filter(|s| s.0 == x0).collect();
    Ok(run(grid, &sources, |s| s.0 == x1, |s| set.contains(s)))
}

fn ordered_pair(grid: &WeightedGrid, a: Site, b: Site, want_path: bool, allow: impl Fn(Site) -> bool) -> DistResult {
    let flip = (b.1, b.0) < (a.1, a.0);
    let (from, to) = if flip { (b, a) } else { (a, b) };
    let mut res = run(grid, &[from], |s| s == to, allow);
    if !want_path {
        res.path = None;
    } else if let (true, Some(p)) = (flip, res.path.as_mut()) {
        // the length stays the fold from the smaller endpoint, matching `value`
        p.sites.reverse();
    }
    res
}

fn masked_site(grid: &WeightedGrid, p: Point) -> Result<Site> {
    let s = grid.spec().snap(p).ok_or_else(|| LfppError::OutOfDomain(format!("point {p:?}")))?;
    if !grid.contains(s) {
        return Err(LfppError::OutOfRegion(s));
    }
    Ok(s)
}

fn masked_sites(grid: &WeightedGrid, region: &Region) -> Result<SiteSet> {
    let set = region.resolve(grid.spec())?.intersect(grid.mask());
    if set.count() == 0 {
        let first = region.resolve(grid.spec())?.sites().next().expect("resolved regions are nonempty");
        return Err(LfppError::OutOfRegion(first));
    }
    Ok(set)
}

fn run(
    grid: &WeightedGrid,
    sources: &[Site],
    target: impl Fn(Site) -> bool,
    allow: impl Fn(Site) -> bool,
) -> DistResult {
    let r = grid.rect();
    let src: Vec<usize> = sources.iter().map(|&s| r.local(s)).collect();
    let mut reached = None;
    let sp = dijkstra(
        grid.num_local(),
        &src,
        |j, _| {
            let hit = target(r.site_of_local(j));
            if hit {
                reached = Some(j);
            }
            hit
        },
        |i, out| grid.expand_local(i, |j| allow(r.site_of_local(j)), &mut |j, w| out.push((j, w))),
    );
    match reached {
        Some(t) => {
            let path = grid.path_from_local(&sp.trace(t));
            DistResult { value: Distance::Finite(sp.dist[t]), path: Some(path), settled: sp.settled }
        }
        None => DistResult::unreachable(sp.settled),
    }
}
