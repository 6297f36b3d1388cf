use serde::{Deserialize, Serialize};

use crate::error::{LfppError, Result};
use crate::lattice::{LatticeSpec, Point, Site, SiteRect};

/// Annulus `A_{r1,r2}(center) = B_{r2}(center) \ closed B_{r1}(center)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Point,
    pub r1: f64,
    pub r2: f64,
}

impl Annulus {
    pub fn new(center: Point, r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
            return Err(LfppError::InvalidArgument(format!("annulus radii need 0 < r1 < r2, got {r1}, {r2}")));
        }
        Ok(Self { center, r1, r2 })
    }
}

/// A subset of the plane, resolved to lattice sites by [`Region::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Closed disk.
    Disk { center: Point, radius: f64 },
    /// Open annulus.
    Annulus(Annulus),
    /// Closed axis-parallel rectangle.
    Rect { lo: Point, hi: Point },
    /// Explicit site set on an `n x n` lattice, row-major.
    Mask { n: usize, bits: Vec<bool> },
}

impl Region {
    pub fn disk(center: Point, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    pub fn rect(lo: Point, hi: Point) -> Self {
        Region::Rect { lo, hi }
    }

    pub fn unit_square() -> Self {
        Region::rect(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    pub fn annulus(center: Point, r1: f64, r2: f64) -> Result<Self> {
        Ok(Region::Annulus(Annulus::new(center, r1, r2)?))
    }

    /// Lattice sites of the region. Fails if the region leaves the lattice or contains no site.
    pub fn resolve(&self, spec: &LatticeSpec) -> Result<SiteSet> {
        let set = match self {
            Region::Disk { center, radius } => {
                let r = *radius;
                if !(r >= 0.0) {
                    return Err(LfppError::InvalidArgument(format!("disk radius {r}")));
                }
                check_inside(spec, *center, r)?;
                let rect = spec.disk_bounds(*center, r).ok_or(LfppError::EmptyRegion)?;
                SiteSet::from_predicate(rect, |s| spec.site_point(s).dist(center) <= r)
            }
            Region::Annulus(a) => {
                check_inside(spec, a.center, a.r2)?;
                let rect = spec.disk_bounds(a.center, a.r2).ok_or(LfppError::EmptyRegion)?;
                SiteSet::from_predicate(rect, |s| {
                    let d = spec.site_point(s).dist(&a.center);
                    d > a.r1 && d < a.r2
                })
            }
            Region::Rect { lo, hi } => {
                if !(lo.x <= hi.x && lo.y <= hi.y) {
                    return Err(LfppError::InvalidArgument(format!("rectangle corners {lo:?} {hi:?}")));
                }
                if !spec.contains_box(*lo, *hi) {
                    return Err(LfppError::OutOfDomain(format!("rectangle {lo:?}..{hi:?}")));
                }
                let rect = spec.rect_sites(*lo, *hi).ok_or(LfppError::EmptyRegion)?;
                SiteSet::from_predicate(rect, |_| true)
            }
            Region::Mask { n, bits } => {
                if *n != spec.n() || bits.len() != n * n {
                    return Err(LfppError::InvalidArgument("mask does not match the lattice".into()));
                }
                SiteSet::from_predicate(spec.full_rect(), |s| bits[spec.linear(s)])
            }
        };
        let set = set.shrink();
        if set.count() == 0 {
            return Err(LfppError::EmptyRegion);
        }
        Ok(set)
    }
}

fn check_inside(spec: &LatticeSpec, c: Point, r: f64) -> Result<()> {
    if !spec.contains_box(Point::new(c.x - r, c.y - r), Point::new(c.x + r, c.y + r)) {
        return Err(LfppError::OutOfDomain(format!("disk of radius {r} about {c:?}")));
    }
    Ok(())
}

/// Lattice sites as a bit set over a bounding rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteSet {
    pub rect: SiteRect,
    bits: Vec<bool>,
}

impl SiteSet {
    pub fn from_predicate(rect: SiteRect, mut f: impl FnMut(Site) -> bool) -> Self {
        let bits = rect.sites().map(&mut f).collect();
        Self { rect, bits }
    }

    pub fn contains(&self, s: Site) -> bool {
        self.rect.contains(s) && self.bits[self.rect.local(s)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Sites in row-major (lexicographic) order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.rect.sites().zip(&self.bits).filter(|(_, b)| **b).map(|(s, _)| s)
    }

    pub fn intersect(&self, other: &SiteSet) -> SiteSet {
        SiteSet::from_predicate(self.rect, |s| self.contains(s) && other.contains(s)).shrink()
    }

    /// Same set with the tightest bounding rectangle.
    fn shrink(self) -> SiteSet {
        let Some(first) = self.sites().next() else { return self };
        let (mut x0, mut y0, mut x1, mut y1) = (first.0, first.1, first.0, first.1);
        for (x, y) in self.sites() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let rect = SiteRect::new(x0, y0, x1, y1);
        if rect == self.rect {
            return self;
        }
        SiteSet::from_predicate(rect, |s| self.contains(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_validation() {
        assert!(Annulus::new(Point::new(0.0, 0.0), 0.3, 0.2).is_err());
        assert!(Annulus::new(Point::new(0.0, 0.0), 0.0, 0.2).is_err());
        assert!(Annulus::new(Point::new(0.0, 0.0), 0.1, 0.2).is_ok());
    }

    #[test]
    fn regions_resolve_to_expected_sites() {
        let spec = LatticeSpec::new(16, 1.0, Point::new(0.0, 0.0)).unwrap();
        let d = Region::disk(Point::new(5.0, 5.0), 1.0).resolve(&spec).unwrap();
        assert_eq!(d.count(), 5);
        let a = Region::annulus(Point::new(8.0, 8.0), 1.0, 2.0).unwrap().resolve(&spec).unwrap();
        // distances sqrt(2) only: four diagonal neighbors
        assert_eq!(a.count(), 4);
        assert!(!a.contains((8, 8)));
        let r = Region::rect(Point::new(1.0, 2.0), Point::new(3.0, 2.0)).resolve(&spec).unwrap();
        assert_eq!(r.sites().collect::<Vec<_>>(), vec![(1, 2), (2, 2), (3, 2)]);
    }

    #[test]
    fn regions_outside_or_empty_fail() {
        let spec = LatticeSpec::new(16, 1.0, Point::new(0.0, 0.0)).unwrap();
        assert!(matches!(Region::disk(Point::new(0.0, 0.0), 3.0).resolve(&spec), Err(LfppError::OutOfDomain(_))));
        assert!(matches!(Region::disk(Point::new(5.5, 5.5), 0.2).resolve(&spec), Err(LfppError::EmptyRegion)));
        let mask = Region::Mask { n: 16, bits: vec![false; 256] };
        assert!(matches!(mask.resolve(&spec), Err(LfppError::EmptyRegion)));
    }
}
