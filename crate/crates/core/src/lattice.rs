//! Discretization of the plane: square lattices, plane points and index rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{LfppError, Result};

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Lattice site `(ix, iy)`; `ix` runs along the x axis.
pub type Site = (usize, usize);

/// An `n x n` square lattice with mesh `spacing`, whose site `(0, 0)` sits at `origin`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLatticeSpec")]
pub struct LatticeSpec {
    n: usize,
    spacing: f64,
    origin: Point,
}

#[derive(Deserialize)]
struct RawLatticeSpec {
    n: usize,
    spacing: f64,
    origin: Point,
}

impl TryFrom<RawLatticeSpec> for LatticeSpec {
    type Error = LfppError;

    fn try_from(raw: RawLatticeSpec) -> Result<Self> {
        LatticeSpec::new(raw.n, raw.spacing, raw.origin)
    }
}

impl LatticeSpec {
    pub fn new(n: usize, spacing: f64, origin: Point) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(LfppError::InvalidSpec(format!("n = {n} is not a power of two >= 2")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LfppError::InvalidSpec(format!("spacing = {spacing} must be positive")));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(LfppError::InvalidSpec("origin must be finite".into()));
        }
        Ok(Self { n, spacing, origin })
    }

    /// Lattice whose unit square `[0,1]^2` is centered in the domain and starts on a site.
    pub fn centered(n: usize, spacing: f64) -> Result<Self> {
        let probe = Self::new(n, spacing, Point::new(0.0, 0.0))?;
        let offset_sites = ((probe.side() - 1.0).max(0.0) / (2.0 * spacing)).round();
        let o = -offset_sites * spacing;
        Self::new(n, spacing, Point::new(o, o))
    }

    /// `spacing = 4/n`: the unit square occupies the central quarter of the domain.
    pub fn auto(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(LfppError::InvalidSpec(format!("n = {n} too small for automatic spacing")));
        }
        Self::centered(n, 4.0 / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn side(&self) -> f64 {
        self.n as f64 * self.spacing
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major linear index; the ordering is lexicographic in `(iy, ix)`.
    #[inline]
    pub fn linear(&self, site: Site) -> usize {
        site.1 * self.n + site.0
    }

    #[inline]
    pub fn site_of(&self, linear: usize) -> Site {
        (linear % self.n, linear / self.n)
    }

    pub fn site_point(&self, site: Site) -> Point {
        Point::new(self.origin.x + site.0 as f64 * self.spacing, self.origin.y + site.1 as f64 * self.spacing)
    }

    /// Fractional lattice coordinates of a plane point.
    pub fn lattice_coords(&self, p: Point) -> (f64, f64) {
        ((p.x - self.origin.x) / self.spacing, (p.y - self.origin.y) / self.spacing)
    }

    /// Nearest site; exact halves round toward the smaller index.
    pub fn snap(&self, p: Point) -> Option<Site> {
        let (tx, ty) = self.lattice_coords(p);
        let ix = (tx - 0.5).ceil();
        let iy = (ty - 0.5).ceil();
        let max = (self.n - 1) as f64;
        if ix < 0.0 || iy < 0.0 || ix > max || iy > max || ix.is_nan() || iy.is_nan() {
            return None;
        }
        Some((ix as usize, iy as usize))
    }

    pub fn full_rect(&self) -> SiteRect {
        SiteRect::new(0, 0, self.n - 1, self.n - 1)
    }

    /// Sites whose points lie in the closed plane rectangle `[lo, hi]`, clipped to the lattice.
    pub fn rect_sites(&self, lo: Point, hi: Point) -> Option<SiteRect> {
        let tol = 1e-9;
        let (ax, ay) = self.lattice_coords(lo);
        let (bx, by) = self.lattice_coords(hi);
        let x0 = (ax - tol).ceil().max(0.0);
        let y0 = (ay - tol).ceil().max(0.0);
        let max = (self.n - 1) as f64;
        let x1 = (bx + tol).floor().min(max);
        let y1 = (by + tol).floor().min(max);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        Some(SiteRect::new(x0 as usize, y0 as usize, x1 as usize, y1 as usize))
    }

    /// Smallest site rectangle containing the closed disk of radius `r` about `c`, clipped.
    pub fn disk_bounds(&self, c: Point, r: f64) -> Option<SiteRect> {
        self.rect_sites(Point::new(c.x - r, c.y - r), Point::new(c.x + r, c.y + r))
    }

    /// Whether the closed plane rectangle lies inside the lattice extent.
    pub fn contains_box(&self, lo: Point, hi: Point) -> bool {
        let max = self.origin.x + (self.n - 1) as f64 * self.spacing;
        let maxy = self.origin.y + (self.n - 1) as f64 * self.spacing;
        let tol = 1e-9 * self.spacing;
        lo.x >= self.origin.x - tol && lo.y >= self.origin.y - tol && hi.x <= max + tol && hi.y <= maxy + tol
    }
}

/// Inclusive rectangle of lattice sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl SiteRect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, s: Site) -> bool {
        s.0 >= self.x0 && s.0 <= self.x1 && s.1 >= self.y0 && s.1 <= self.y1
    }

    pub fn contains_rect(&self, other: &SiteRect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    /// Grow by `margin` sites on every side, clipped to `[0, n)`.
    pub fn expand(&self, margin: usize, n: usize) -> SiteRect {
        SiteRect::new(
            self.x0.saturating_sub(margin),
            self.y0.saturating_sub(margin),
            (self.x1 + margin).min(n - 1),
            (self.y1 + margin).min(n - 1),
        )
    }

    /// Local row-major index within the rectangle.
    #[inline]
    pub fn local(&self, s: Site) -> usize {
        (s.1 - self.y0) * self.width() + (s.0 - self.x0)
    }

    #[inline]
    pub fn site_of_local(&self, i: usize) -> Site {
        let w = self.width();
        (self.x0 + i % w, self.y0 + i / w)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| (x, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(LatticeSpec::new(12, 0.1, Point::new(0.0, 0.0)).is_err());
        assert!(LatticeSpec::new(16, 0.0, Point::new(0.0, 0.0)).is_err());
        assert!(LatticeSpec::new(16, 0.1, Point::new(0.0, 0.0)).is_ok());
    }

    #[test]
    fn auto_spacing_centers_the_unit_square() {
        let spec = LatticeSpec::auto(512).unwrap();
        assert_eq!(spec.spacing(), 1.0 / 128.0);
        assert_eq!(spec.side(), 4.0);
        let lo = spec.snap(Point::new(0.0, 0.0)).unwrap();
        let hi = spec.snap(Point::new(1.0, 1.0)).unwrap();
        assert_eq!(lo, (192, 192));
        assert_eq!(hi, (320, 320));
        assert_eq!(spec.site_point(lo), Point::new(0.0, 0.0));
    }

    #[test]
    fn snap_ties_go_to_smaller_index() {
        let spec = LatticeSpec::new(8, 1.0, Point::new(0.0, 0.0)).unwrap();
        assert_eq!(spec.snap(Point::new(2.5, 3.5)), Some((2, 3)));
        assert_eq!(spec.snap(Point::new(2.51, 3.49)), Some((3, 3)));
        assert_eq!(spec.snap(Point::new(-0.6, 0.0)), None);
        assert_eq!(spec.snap(Point::new(7.4, 0.0)), Some((7, 0)));
    }

    #[test]
    fn rect_sites_are_inclusive() {
        let spec = LatticeSpec::auto(64).unwrap();
        let r = spec.rect_sites(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        assert_eq!(r.width(), 17);
        assert_eq!(r.area(), 17 * 17);
        let i = r.local((r.x0 + 3, r.y0 + 2));
        assert_eq!(r.site_of_local(i), (r.x0 + 3, r.y0 + 2));
    }
}
