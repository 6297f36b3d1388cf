use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

use super::fft::{signed_freq, Dst1, Fft2};
use super::{FieldKind, FieldSample};
use crate::error::{LfppError, Result};
use crate::lattice::LatticeSpec;

/// Zero-mean torus GFF by spectral synthesis.
///
/// White noise is transformed, every nonzero mode is scaled by `sqrt(2 pi) / (spacing |k|)`
/// with `k = 2 pi m / side` the torus wavevector, the zero mode is dropped, and the inverse
/// transform gives `Cov(h(x), h(y)) = side^-2 sum_{k != 0} (2 pi / |k|^2) cos(k (x - y))`.
/// Real white noise makes the spectrum Hermitian, so the output is real.
pub fn sample_torus_gff(spec: &LatticeSpec, seed: u64) -> Result<FieldSample> {
    let n = spec.n();
    if n < 8 {
        return Err(LfppError::InvalidSpec(format!("torus sampler needs n >= 8, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = (0..n * n).map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0)).collect();
    let fft = Fft2::new(n);
    fft.forward(&mut buf);

    let dk = 2.0 * PI / spec.side();
    let amp0 = (2.0 * PI).sqrt() / spec.spacing();
    for my in 0..n {
        let ky = dk * signed_freq(my, n);
        for mx in 0..n {
            let kx = dk * signed_freq(mx, n);
            let k = kx.hypot(ky);
            let c = &mut buf[my * n + mx];
            if mx == 0 && my == 0 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= amp0 / k;
            }
        }
    }
    fft.inverse(&mut buf);
    let norm = 1.0 / (n * n) as f64;
    let mut values: Vec<f64> = buf.iter().map(|c| c.re * norm).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);

    Ok(FieldSample { spec: *spec, values, kind: FieldKind::TorusWholePlane, seed, mean_removed: true, derived: false })
}

/// Zero-boundary GFF on the square with corner sites `(0,0)` and `(n-1,n-1)`.
///
/// Sine-series synthesis over the interior modes `1 <= j, k <= n-2`: the coefficient of
/// `(2/L) sin(j pi x / L) sin(k pi y / L)` is Gaussian with variance `2 pi / lambda_jk`,
/// `lambda_jk = pi^2 (j^2 + k^2) / L^2`, `L = (n-1) spacing`. The covariance is the
/// truncated eigen-series `sum_jk 8 / (pi (j^2 + k^2)) sin sin sin sin`, independent of `L`.
pub fn sample_dirichlet_gff(spec: &LatticeSpec, seed: u64) -> Result<FieldSample> {
    let n = spec.n();
    if n < 4 {
        return Err(LfppError::InvalidSpec(format!("dirichlet sampler needs n >= 4, got {n}")));
    }
    let big_n = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // coefficients a[k][j] for j,k in 1..big_n, stored on a big_n x big_n grid
    let mut coef = vec![0.0; big_n * big_n];
    let scale = 2.0 * (2.0 * PI).sqrt() / PI;
    for k in 1..big_n {
        for j in 1..big_n {
            let z: f64 = StandardNormal.sample(&mut rng);
            coef[k * big_n + j] = scale * z / ((j * j + k * k) as f64).sqrt();
        }
    }

    let dst = Dst1::new(big_n);
    let mut scratch = Vec::new();
    let mut row_out = vec![0.0; big_n];
    // transform along j for each k
    for k in 1..big_n {
        let row = &coef[k * big_n..(k + 1) * big_n];
        dst.apply(row, &mut row_out, &mut scratch);
        coef[k * big_n..(k + 1) * big_n].copy_from_slice(&row_out);
    }
    // transform along k for each x index
    let mut col = vec![0.0; big_n];
    let mut values = vec![0.0; n * n];
    for ix in 1..big_n {
        for k in 0..big_n {
            col[k] = coef[k * big_n + ix];
        }
        dst.apply(&col, &mut row_out, &mut scratch);
        for iy in 1..big_n {
            values[iy * n + ix] = row_out[iy];
        }
    }

    Ok(FieldSample { spec: *spec, values, kind: FieldKind::DirichletSquare, seed, mean_removed: false, derived: false })
}
