use std::f64::consts::PI;

use super::{FieldKind, FieldSample};
use crate::error::{LfppError, Result};
use crate::lattice::{LatticeSpec, Point};

/// Bilinear interpolation at fractional lattice coordinates, periodic when `wrap` is set.
/// Returns `None` outside `[0, n-1]^2` for non-periodic lookups.
fn interpolate(spec: &LatticeSpec, values: &[f64], tx: f64, ty: f64, wrap: bool) -> Option<f64> {
    let n = spec.n();
    let (tx, ty) = if wrap {
        (tx.rem_euclid(n as f64), ty.rem_euclid(n as f64))
    } else {
        let max = (n - 1) as f64;
        let tol = 1e-9;
        if tx < -tol || ty < -tol || tx > max + tol || ty > max + tol {
            return None;
        }
        (tx.clamp(0.0, max), ty.clamp(0.0, max))
    };
    let (x0, fx) = split_coord(tx, n, wrap);
    let (y0, fy) = split_coord(ty, n, wrap);
    let x1 = if wrap { (x0 + 1) % n } else { (x0 + 1).min(n - 1) };
    let y1 = if wrap { (y0 + 1) % n } else { (y0 + 1).min(n - 1) };
    let v = |x: usize, y: usize| values[y * n + x];
    if fx == 0.0 && fy == 0.0 {
        return Some(v(x0, y0));
    }
    let top = v(x0, y0) * (1.0 - fx) + v(x1, y0) * fx;
    let bot = v(x0, y1) * (1.0 - fx) + v(x1, y1) * fx;
    Some(top * (1.0 - fy) + bot * fy)
}

fn split_coord(t: f64, n: usize, wrap: bool) -> (usize, f64) {
    let mut i = t.floor() as usize;
    if !wrap && i >= n - 1 {
        i = n - 2;
    }
    let i = i.min(n - 1);
    (i, t - i as f64)
}

/// Bilinear interpolation of a field at a plane point inside the lattice extent.
pub fn bilinear(field: &FieldSample, p: Point) -> Option<f64> {
    let (tx, ty) = field.spec.lattice_coords(p);
    interpolate(&field.spec, &field.values, tx, ty, false)
}

/// Circle average `h_r(z)`: the mean of bilinear samples at `max(64, ceil(2 pi r / spacing))`
/// equally spaced points on the circle.
pub fn circle_average(field: &FieldSample, z: Point, r: f64) -> Result<f64> {
    let spec = &field.spec;
    if !(r >= spec.spacing()) {
        return Err(LfppError::InvalidArgument(format!(
            "circle radius {r} is below the lattice spacing {}",
            spec.spacing()
        )));
    }
    if !spec.contains_box(Point::new(z.x - r, z.y - r), Point::new(z.x + r, z.y + r)) {
        return Err(LfppError::OutOfDomain(format!("circle of radius {r} about {z:?}")));
    }
    let m = ((2.0 * PI * r / spec.spacing()).ceil() as usize).max(64);
    let mut acc = 0.0;
    for k in 0..m {
        let theta = 2.0 * PI * k as f64 / m as f64;
        let p = Point::new(z.x + r * theta.cos(), z.y + r * theta.sin());
        acc += bilinear(field, p).ok_or_else(|| LfppError::OutOfDomain(format!("{p:?}")))?;
    }
    Ok(acc / m as f64)
}

/// Pointwise `h + f`, with `f` evaluated at lattice sites.
pub fn add_function(field: &FieldSample, f: impl Fn(Point) -> f64) -> Result<FieldSample> {
    let spec = field.spec;
    let mut values = field.values.clone();
    for (i, v) in values.iter_mut().enumerate() {
        let fx = f(spec.site_point(spec.site_of(i)));
        if !fx.is_finite() {
            return Err(LfppError::InvalidArgument(format!("added function is not finite at site {i}")));
        }
        *v += fx;
    }
    Ok(FieldSample { values, derived: true, ..field.clone() })
}

/// `h + c`.
pub fn shift(field: &FieldSample, c: f64) -> Result<FieldSample> {
    add_function(field, |_| c)
}

/// Lattice version of `h(a . + b) + q_hat log a` for dyadic `a = 2^k`.
///
/// Output site `p` reads the input at `a p + b`: a plain subsample when that lands on a site
/// (always the case for `a >= 1` when `b` and the origin are on the lattice), bilinear
/// interpolation otherwise. Torus fields are read periodically; Dirichlet fields must not be
/// read outside their square.
pub fn rescale_field(field: &FieldSample, a: f64, b: Point, q_hat: f64) -> Result<FieldSample> {
    let spec = field.spec;
    let n = spec.n();
    let k = a.log2();
    let max_k = (n as f64).log2() - 3.0;
    if !(a > 0.0) || k.fract() != 0.0 || k.abs() > max_k {
        return Err(LfppError::InvalidArgument(format!("scale a = {a} must be 2^k with |k| <= {max_k}")));
    }
    let (bx, by) = spec.lattice_coords(b);
    if (bx - bx.round()).abs() > 1e-9 || (by - by.round()).abs() > 1e-9 {
        return Err(LfppError::InvalidArgument(format!("translation {b:?} is not a lattice point")));
    }
    let wrap = field.kind == FieldKind::TorusWholePlane;
    let o = spec.origin();
    let d = spec.spacing();
    let snap_int = |t: f64| if (t - t.round()).abs() < 1e-9 { t.round() } else { t };
    // lattice coordinate of a*p + b for output index i is a*i + c
    let cx = snap_int((a * o.x + b.x - o.x) / d);
    let cy = snap_int((a * o.y + b.y - o.y) / d);
    let offset = q_hat * a.ln();

    let mut values = vec![0.0; n * n];
    for iy in 0..n {
        let ty = snap_int(a * iy as f64 + cy);
        for ix in 0..n {
            let tx = snap_int(a * ix as f64 + cx);
            let v = if tx.fract() == 0.0 && ty.fract() == 0.0 {
                let (x, y) = if wrap {
                    (tx.rem_euclid(n as f64) as usize, ty.rem_euclid(n as f64) as usize)
                } else {
                    if tx < 0.0 || ty < 0.0 || tx > (n - 1) as f64 || ty > (n - 1) as f64 {
                        return Err(LfppError::OutOfDomain(format!("rescaled site ({ix}, {iy})")));
                    }
                    (tx as usize, ty as usize)
                };
                field.values[y * n + x]
            } else {
                interpolate(&spec, &field.values, tx, ty, wrap)
                    .ok_or_else(|| LfppError::OutOfDomain(format!("rescaled site ({ix}, {iy})")))?
            };
            values[iy * n + ix] = v + offset;
        }
    }
    Ok(FieldSample { values, derived: true, ..field.clone() })
}
