use crate::error::{LfppError, Result};
use crate::lattice::Site;

use super::grid::WeightedGrid;
use super::region::{Annulus, Region};
use super::search::dijkstra;
use super::{DistResult, Distance};

/// Shortest cycle in the annulus separating its two boundary circles.
///
/// Cycles are classified by the parity of their crossings with a horizontal ray from the
/// center. Searching the two-sheeted cover (site, parity) gives every odd cycle as a path
/// from `(v, 0)` to `(u, 0)` closed by one crossing edge `u`-`v`; the minimum over crossing
/// edges is exact even for cycles that meet the ray several times. A shortest odd cycle is
/// simple, hence winds once around the center.
pub fn dist_around_annulus(grid: &WeightedGrid, ann: &Annulus) -> Result<DistResult> {
    let spec = *grid.spec();
    let h = spec.spacing();
    if ann.r2 - ann.r1 < 3.0 * h {
        return Err(LfppError::DegenerateAnnulus { width: ann.r2 - ann.r1, min: 3.0 * h });
    }
    if ann.r1 < 2.0 * h {
        return Err(LfppError::InvalidArgument(format!("inner radius {} is below two lattice spacings", ann.r1)));
    }
    let set = Region::Annulus(*ann).resolve(&spec)?;
    if let Some(s) = set.sites().find(|&s| !grid.contains(s)) {
        return Err(LfppError::OutOfRegion(s));
    }

    // Ray at height floor(cy) + 1/2 (lattice units), pointing right. An edge crosses it when
    // it joins rows iy0 and iy0 + 1 with its midpoint right of the center.
    let (cx, cy) = spec.lattice_coords(ann.center);
    let iy0 = cy.floor() as usize;
    let crosses =
        |a: Site, b: Site| -> bool { a.1.min(b.1) == iy0 && a.1.max(b.1) == iy0 + 1 && (a.0 + b.0) as f64 * 0.5 > cx };

    // Crossing edges (u below, v above), grouped by v.
    let mut edges: Vec<(Site, Site, f64)> = Vec::new();
    for u in set.sites().filter(|s| s.1 == iy0) {
        for dx in [-1isize, 0, 1] {
            let x = u.0 as isize + dx;
            if x < 0 {
                continue;
            }
            let v = (x as usize, iy0 + 1);
            if set.contains(v) && crosses(u, v) {
                let w = grid.edge_weight(u, v).expect("annulus sites are masked");
                edges.push((u, v, w));
            }
        }
    }
    let rect = grid.rect();
    edges.sort_by_key(|&(u, v, _)| (rect.local(v), rect.local(u)));

    let allow = |j: usize| set.contains(rect.site_of_local(j));
    let n_nodes = 2 * grid.num_local();
    let mut best = f64::INFINITY;
    let mut best_cycle: Option<Vec<usize>> = None;
    let mut settled = 0;
    let mut start = 0;
    while start < edges.len() {
        let v = edges[start].1;
        let end = start + edges[start..].iter().take_while(|e| e.1 == v).count();
        let group = &edges[start..end];
        start = end;
        let min_w = group.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        if min_w >= best {
            continue;
        }
        let targets: Vec<(usize, f64)> = group.iter().map(|&(u, _, w)| (rect.local(u), w)).collect();
        let mut run_best: Option<(usize, f64)> = None;
        let mut bound = best;
        let sp = dijkstra(
            n_nodes,
            &[2 * rect.local(v)],
            |node, d| {
                if d + min_w >= bound {
                    return true;
                }
                if node % 2 == 0 {
                    if let Some(&(j, w)) = targets.iter().find(|t| t.0 == node / 2) {
                        if w + d < bound {
                            bound = w + d;
                            run_best = Some((j, w + d));
                        }
                    }
                }
                false
            },
            |node, out| {
                let (i, p) = (node / 2, node % 2);
                let a = rect.site_of_local(i);
                grid.expand_local(i, allow, &mut |j, w| {
                    let flip = crosses(a, rect.site_of_local(j)) as usize;
                    out.push((2 * j + (p ^ flip), w));
                });
            },
        );
        settled += sp.settled;
        if let Some((j, value)) = run_best {
            best = value;
            let mut cycle = vec![j];
            cycle.extend(sp.trace(2 * j).into_iter().map(|node| node / 2));
            best_cycle = Some(cycle);
        }
    }
    Ok(match best_cycle {
        Some(cycle) => {
            let path = grid.path_from_local(&cycle);
            DistResult { value: Distance::Finite(path.length), path: Some(path), settled }
        }
        None => DistResult::unreachable(settled),
    })
}
