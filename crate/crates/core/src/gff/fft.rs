use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Square 2-D FFT built from row transforms and transposes. Unnormalized in both directions.
pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.run(&self.forward, buf);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.run(&self.inverse, buf);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        plan.process(buf);
        transpose(buf, self.n);
        plan.process(buf);
        transpose(buf, self.n);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Signed frequency index of bin `m` for an `n`-point transform, in `(-n/2, n/2]`.
#[inline]
pub(crate) fn signed_freq(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// DST-I of `a[1..N-1]`: `s[i] = sum_j a[j] sin(pi i j / N)` for `i = 1..N-1`.
/// `a[0]` is ignored; the result has `s[0] = 0`.
pub(crate) struct Dst1 {
    big_n: usize,
    plan: Arc<dyn Fft<f64>>,
}

impl Dst1 {
    pub(crate) fn new(big_n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { big_n, plan: planner.plan_fft_forward(2 * big_n) }
    }

    pub(crate) fn apply(&self, a: &[f64], out: &mut [f64], scratch: &mut Vec<Complex64>) {
        let nn = self.big_n;
        scratch.clear();
        scratch.resize(2 * nn, Complex64::new(0.0, 0.0));
        for j in 1..nn {
            scratch[j] = Complex64::new(a[j], 0.0);
            scratch[2 * nn - j] = Complex64::new(-a[j], 0.0);
        }
        self.plan.process(scratch);
        out[0] = 0.0;
        for i in 1..nn {
            out[i] = -0.5 * scratch[i].im;
        }
    }
}
