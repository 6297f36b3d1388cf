use std::f64::consts::{E, PI};

use crate::error::{LfppError, Result};
use crate::lattice::LatticeSpec;

/// Heat kernel `p_t` at radial distance `x`: `exp(-x^2 / 2t) / (2 pi t)`.
pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LfppError::InvalidArgument(format!("heat kernel time t = {t} must be positive")));
    }
    Ok((-x * x / (2.0 * t)).exp() / (2.0 * PI * t))
}

fn smooth_step_piece(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Radial cutoff radius `eps log(1/eps)` of the localized kernel.
pub fn cutoff_radius(epsilon: f64) -> f64 {
    epsilon * (1.0 / epsilon).ln()
}

fn check_bump_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0 / E) {
        return Err(LfppError::InvalidArgument(format!("localization needs 0 < eps < 1/e, got {epsilon}")));
    }
    Ok(())
}

/// Smooth radial bump `psi_eps`: 1 on `[0, rho/2]`, 0 on `[rho, inf)`, `rho = eps log(1/eps)`.
pub fn bump(epsilon: f64, x: f64) -> Result<f64> {
    check_bump_epsilon(epsilon)?;
    if !(x >= 0.0) {
        return Err(LfppError::InvalidArgument(format!("radial distance {x} must be >= 0")));
    }
    Ok(bump_unchecked(cutoff_radius(epsilon), x))
}

#[inline]
fn bump_unchecked(rho: f64, x: f64) -> f64 {
    let t = x / rho;
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = smooth_step_piece(2.0 - 2.0 * t);
        let b = smooth_step_piece(2.0 * t - 1.0);
        a / (a + b)
    }
}

/// `Z_eps = int psi_eps(w) p_{eps^2/2}(w) dw` by composite Simpson in the radial variable.
///
/// The step is at most `spacing / 4` and at most `eps / 64`.
pub fn normalizer_z(epsilon: f64, spacing: f64) -> Result<f64> {
    check_bump_epsilon(epsilon)?;
    if !(spacing > 0.0) {
        return Err(LfppError::InvalidArgument(format!("spacing {spacing} must be positive")));
    }
    let rho = cutoff_radius(epsilon);
    let max_step = (spacing / 4.0).min(epsilon / 64.0);
    let mut m = (rho / max_step).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let h = rho / m as f64;
    let t = epsilon * epsilon / 2.0;
    let f = |r: f64| bump_unchecked(rho, r) * (-r * r / (2.0 * t)).exp() / (2.0 * PI * t) * 2.0 * PI * r;
    let mut acc = f(0.0) + f(rho);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    Ok((acc * h / 3.0).min(1.0))
}

/// The truncated kernel `psi_eps p_{eps^2/2}` sampled on a lattice, stored row by row over
/// its support and normalized to unit sum.
#[derive(Clone, Debug)]
pub struct LocalizedKernel {
    pub epsilon: f64,
    /// Support half-width in sites.
    pub reach: usize,
    /// `(dy, dx_start, weights)` with weights for `dx = dx_start, dx_start + 1, ...`.
    pub rows: Vec<(isize, isize, Vec<f64>)>,
    /// Truncated lattice sum over full lattice sum.
    pub z_lattice: f64,
}

impl LocalizedKernel {
    pub fn new(spec: &LatticeSpec, epsilon: f64) -> Result<Self> {
        check_bump_epsilon(epsilon)?;
        let rho = cutoff_radius(epsilon);
        let d = spec.spacing();
        let n = spec.n();
        let reach = ((rho / d).ceil() as usize).min(n / 2);
        let g = |k: isize| {
            let x = k as f64 * d;
            (-x * x / (epsilon * epsilon)).exp()
        };
        // full kernel sum over the torus offsets (-n/2, n/2]
        let half = (n / 2) as isize;
        let g_sum: f64 = (-half + 1..=half).map(g).sum();
        let full_sum = g_sum * g_sum;

        let mut rows = Vec::new();
        let mut trunc_sum = 0.0;
        for dy in -(reach as isize)..=(reach as isize) {
            let mut start = None;
            let mut w = Vec::new();
            for dx in -(reach as isize)..=(reach as isize) {
                let r = d * ((dx * dx + dy * dy) as f64).sqrt();
                let psi = if r < rho { bump_unchecked(rho, r) } else { 0.0 };
                let v = psi * g(dx) * g(dy);
                if v > 0.0 {
                    if start.is_none() {
                        start = Some(dx);
                    }
                    w.push(v);
                } else if start.is_some() {
                    break;
                }
            }
            if let Some(s) = start {
                trunc_sum += w.iter().sum::<f64>();
                rows.push((dy, s, w));
            }
        }
        for (_, _, w) in rows.iter_mut() {
            w.iter_mut().for_each(|v| *v /= trunc_sum);
        }
        Ok(Self { epsilon, reach, rows, z_lattice: trunc_sum / full_sum })
    }

    /// Weight at offset `(dx, dy)`, zero outside the support.
    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        self.rows
            .iter()
            .find(|(ry, _, _)| *ry == dy)
            .and_then(|(_, s, w)| {
                let k = dx - s;
                (k >= 0).then(|| w.get(k as usize).copied()).flatten()
            })
            .unwrap_or(0.0)
    }
}
