use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::Fft2;
use super::kernel::LocalizedKernel;
use super::{check_epsilon, FieldSample, MollifiedField};
use crate::error::{LfppError, Result};
use crate::lattice::{LatticeSpec, SiteRect};

/// Heat-kernel mollification of one field at several scales, reusing the field's spectrum.
pub struct Mollifier {
    spec: LatticeSpec,
    source_seed: u64,
    spectrum: Vec<Complex64>,
    fft: Fft2,
}

impl Mollifier {
    pub fn new(field: &FieldSample) -> Self {
        let n = field.spec.n();
        let fft = Fft2::new(n);
        let mut spectrum: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut spectrum);
        Self { spec: field.spec, source_seed: field.seed, spectrum, fft }
    }

    /// `h*_eps`: circular convolution with `p_{eps^2/2}` sampled at lattice offsets and
    /// normalized to unit lattice sum.
    pub fn mollify(&self, epsilon: f64) -> Result<MollifiedField> {
        check_epsilon(&self.spec, epsilon)?;
        let n = self.spec.n();
        let transfer = kernel_transfer_1d(&self.spec, epsilon);
        let mut buf = self.spectrum.clone();
        for my in 0..n {
            for mx in 0..n {
                buf[my * n + mx] *= transfer[mx] * transfer[my];
            }
        }
        self.fft.inverse(&mut buf);
        let norm = 1.0 / (n * n) as f64;
        let values: Vec<f64> = buf.iter().map(|c| c.re * norm).collect();
        Ok(MollifiedField {
            spec: self.spec,
            epsilon,
            values,
            localized: false,
            z_epsilon: 1.0,
            source_seed: self.source_seed,
            coverage: self.spec.full_rect(),
        })
    }
}

/// DFT of the 1-D factor of the sampled kernel, divided by its sum. The 2-D kernel is the
/// outer product of this factor with itself.
fn kernel_transfer_1d(spec: &LatticeSpec, epsilon: f64) -> Vec<f64> {
    let n = spec.n();
    let d = spec.spacing();
    let g: Vec<f64> = (0..n)
        .map(|i| {
            let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            let x = k * d;
            (-x * x / (epsilon * epsilon)).exp()
        })
        .collect();
    let sum: f64 = g.iter().sum();
    // g is even, so its DFT is real: G(m) = sum_i g(i) cos(2 pi i m / n)
    let mut planner = rustfft::FftPlanner::new();
    let plan = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v / sum, 0.0)).collect();
    plan.process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

pub fn mollify(field: &FieldSample, epsilon: f64) -> Result<MollifiedField> {
    check_epsilon(&field.spec, epsilon)?;
    Mollifier::new(field).mollify(epsilon)
}

/// Localized mollification `hat h*_eps` over the whole lattice.
pub fn mollify_localized(field: &FieldSample, epsilon: f64) -> Result<MollifiedField> {
    mollify_localized_window(field, epsilon, field.spec.full_rect())
}

/// Localized mollification evaluated on the sites of `window` only.
///
/// Computed as a direct lattice sum over the kernel's support (periodic wrap), so the
/// value at `z` reads only sites within `eps log(1/eps)` of `z`. Sites outside the window
/// hold 0 and are excluded by `coverage`.
pub fn mollify_localized_window(field: &FieldSample, epsilon: f64, window: SiteRect) -> Result<MollifiedField> {
    let spec = field.spec;
    check_epsilon(&spec, epsilon)?;
    if !spec.full_rect().contains_rect(&window) {
        return Err(LfppError::OutOfDomain("window exceeds the lattice".into()));
    }
    let kernel = LocalizedKernel::new(&spec, epsilon)?;
    let n = spec.n();
    let reach = kernel.reach;
    let padded_w = n + 2 * reach;

    // each field row padded periodically by `reach` on both sides
    let mut padded = vec![0.0; n * padded_w];
    for y in 0..n {
        let row = &field.values[y * n..(y + 1) * n];
        let dst = &mut padded[y * padded_w..(y + 1) * padded_w];
        for (j, v) in dst.iter_mut().enumerate() {
            let x = (j as isize - reach as isize).rem_euclid(n as isize) as usize;
            *v = row[x];
        }
    }

    let w = window.width();
    let rows: Vec<Vec<f64>> = (window.y0..=window.y1)
        .into_par_iter()
        .map(|y| {
            let mut out = vec![0.0; w];
            for (i, x) in (window.x0..=window.x1).enumerate() {
                let mut acc = 0.0;
                for (dy, dx0, weights) in &kernel.rows {
                    let yy = (y as isize + dy).rem_euclid(n as isize) as usize;
                    let start = (x as isize + dx0 + reach as isize) as usize;
                    let src = &padded[yy * padded_w + start..yy * padded_w + start + weights.len()];
                    acc += dot(weights, src);
                }
                out[i] = acc;
            }
            out
        })
        .collect();

    let mut values = vec![0.0; n * n];
    for (row, y) in rows.iter().zip(window.y0..=window.y1) {
        values[y * n + window.x0..y * n + window.x1 + 1].copy_from_slice(row);
    }
    Ok(MollifiedField {
        spec,
        epsilon,
        values,
        localized: true,
        z_epsilon: kernel.z_lattice,
        source_seed: field.seed,
        coverage: window,
    })
}

/// Fixed-order dot product (four interleaved partial sums).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            s[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::{heat_kernel, sample_torus_gff, FieldKind};

    fn spec(n: usize) -> LatticeSpec {
        LatticeSpec::auto(n).unwrap()
    }

    #[test]
    fn constants_pass_through_both_mollifiers() {
        let s = spec(64);
        let f = FieldSample::constant(s, 1.75);
        let m = mollify(&f, 0.25).unwrap();
        assert!(m.values.iter().all(|v| (v - 1.75).abs() < 1e-12));
        let l = mollify_localized(&f, 0.25).unwrap();
        assert!(l.values.iter().all(|v| (v - 1.75).abs() < 1e-12));
        assert!(l.localized && l.z_epsilon <= 1.0);
    }

    #[test]
    fn too_fine_epsilon_is_rejected() {
        let s = spec(64);
        let f = FieldSample::constant(s, 0.0);
        assert!(matches!(mollify(&f, 0.1), Err(LfppError::MollificationTooFine { .. })));
        assert!(matches!(mollify_localized(&f, 0.1), Err(LfppError::MollificationTooFine { .. })));
    }

    #[test]
    fn spike_response_is_central_kernel_weight() {
        let s = spec(64);
        let eps = 8.0 * s.spacing();
        let mut values = vec![0.0; s.len()];
        let site = (20, 33);
        values[s.linear(site)] = 1.0;
        let f = FieldSample::from_values(s, FieldKind::TorusWholePlane, values).unwrap();
        let m = mollify(&f, eps).unwrap();
        // direct kernel weights from the heat kernel over all wrapped offsets
        let n = s.n() as isize;
        let t = eps * eps / 2.0;
        let mut total = 0.0;
        for dy in -n / 2 + 1..=n / 2 {
            for dx in -n / 2 + 1..=n / 2 {
                let r = s.spacing() * ((dx * dx + dy * dy) as f64).sqrt();
                total += heat_kernel(t, r).unwrap();
            }
        }
        let central = heat_kernel(t, 0.0).unwrap() / total;
        assert!((m.at(site) - central).abs() < 1e-12, "{} vs {central}", m.at(site));
    }

    #[test]
    fn mollification_reduces_variance() {
        let s = spec(128);
        let f = sample_torus_gff(&s, 3).unwrap();
        let m = mollify(&f, 4.0 * s.spacing()).unwrap();
        let var = |v: &[f64]| {
            let mu = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / v.len() as f64
        };
        assert!(var(&m.values) < var(&f.values));
    }

    #[test]
    fn window_matches_full_localized_values() {
        let s = spec(64);
        let f = sample_torus_gff(&s, 9).unwrap();
        let full = mollify_localized(&f, 0.25).unwrap();
        let win = SiteRect::new(10, 20, 30, 25);
        let part = mollify_localized_window(&f, 0.25, win).unwrap();
        for site in win.sites() {
            assert_eq!(full.at(site), part.at(site));
        }
        assert_eq!(part.coverage, win);
    }
}
