#![allow(dead_code)]

use std::f64::consts::SQRT_2;

use lfpp_core::gff::MollifiedField;
use lfpp_core::metric::{build_weighted_grid, Region, WeightedGrid};
use lfpp_core::{LatticeSpec, Point, Site};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const H: f64 = 0.125;

/// 8x8 lattice at the origin with spacing 1/8 and i.i.d. normal values.
pub fn random_moll(seed: u64, scale: f64) -> MollifiedField {
    let spec = LatticeSpec::new(8, H, Point::new(0.0, 0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..64).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    MollifiedField::from_values(spec, 2.0 * H, values).unwrap()
}

pub fn pt(s: Site) -> Point {
    Point::new(s.0 as f64 * H, s.1 as f64 * H)
}

/// The `k x k` block of sites at the origin.
pub fn block(k: usize) -> Region {
    Region::rect(Point::new(0.0, 0.0), pt((k - 1, k - 1)))
}

pub fn grid_on(moll: &MollifiedField, xi: f64, k: usize) -> WeightedGrid {
    build_weighted_grid(moll, xi, &block(k)).unwrap()
}

/// Undirected edges of the `k x k` block, written out from the trapezoid rule.
pub struct Graph {
    pub k: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(moll: &MollifiedField, xi: f64, k: usize, keep: impl Fn(Site) -> bool) -> Self {
        let cost = |s: Site| (xi * moll.values[s.1 * moll.spec.n() + s.0]).exp();
        let mut edges = Vec::new();
        for y in 0..k {
            for x in 0..k {
                for (dx, dy) in [(1isize, 0isize), (0, 1), (1, 1), (-1, 1)] {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || nx >= k as isize || ny >= k as isize {
                        continue;
                    }
                    let (a, b) = ((x, y), (nx as usize, ny as usize));
                    if !keep(a) || !keep(b) {
                        continue;
                    }
                    let len = if dx != 0 && dy != 0 { SQRT_2 } else { 1.0 };
                    let w = moll.spec.spacing() * len * (cost(a) + cost(b)) * 0.5;
                    edges.push((y * k + x, b.1 * k + b.0, w));
                }
            }
        }
        edges.sort_by_key(|e| (e.0, e.1));
        Self { k, edges }
    }

    pub fn node(&self, s: Site) -> usize {
        s.1 * self.k + s.0
    }

    /// Single-source distances by repeated relaxation over the sorted edge list.
    pub fn bellman_ford(&self, src: &[usize]) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; self.k * self.k];
        for &s in src {
            d[s] = 0.0;
        }
        loop {
            let mut changed = false;
            for &(a, b, w) in &self.edges {
                if d[a] + w < d[b] {
                    d[b] = d[a] + w;
                    changed = true;
                }
                if d[b] + w < d[a] {
                    d[a] = d[b] + w;
                    changed = true;
                }
            }
            if !changed {
                return d;
            }
        }
    }

    pub fn floyd_warshall(&self) -> Vec<Vec<f64>> {
        let m = self.k * self.k;
        let mut d = vec![vec![f64::INFINITY; m]; m];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(a, b, w) in &self.edges {
            d[a][b] = d[a][b].min(w);
            d[b][a] = d[b][a].min(w);
        }
        for via in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let alt = d[i][via] + d[via][j];
                    if alt < d[i][j] {
                        d[i][j] = alt;
                    }
                }
            }
        }
        d
    }
}

/// Torus covariance at lattice offset `(dx, dy)` by summing the spectral density over every
/// nonzero mode: `side^-2 sum_k (2 pi / |k|^2) cos(k . d)`.
pub fn torus_cov_oracle(spec: &LatticeSpec, dx: i64, dy: i64) -> f64 {
    use std::f64::consts::PI;
    let n = spec.n() as i64;
    let side = spec.side();
    let dk = 2.0 * PI / side;
    let h = spec.spacing();
    let mut acc = 0.0;
    for my in -(n / 2) + 1..=n / 2 {
        for mx in -(n / 2) + 1..=n / 2 {
            if mx == 0 && my == 0 {
                continue;
            }
            let (kx, ky) = (dk * mx as f64, dk * my as f64);
            acc += 2.0 * PI / (kx * kx + ky * ky) * (kx * dx as f64 * h + ky * dy as f64 * h).cos();
        }
    }
    acc / (side * side)
}

/// Dirichlet Green's function on the lattice square with corner sites `0` and `n - 1`,
/// truncated to the modes the sampler carries.
pub fn dirichlet_cov_oracle(n: usize, a: Site, b: Site) -> f64 {
    use std::f64::consts::PI;
    let l = (n - 1) as f64;
    let s = |j: usize, x: usize| (j as f64 * PI * x as f64 / l).sin();
    let mut acc = 0.0;
    for k in 1..n - 1 {
        for j in 1..n - 1 {
            acc += 8.0 / (PI * (j * j + k * k) as f64) * s(j, a.0) * s(k, a.1) * s(j, b.0) * s(k, b.1);
        }
    }
    acc
}

/// `int psi_eps(w) p_{eps^2/2}(w) dw` by the midpoint rule on a square grid of step `eps / 200`.
pub fn z_quadrature_2d(eps: f64) -> f64 {
    use std::f64::consts::PI;
    let rho = eps * (1.0 / eps).ln();
    let step = eps / 200.0;
    let m = (rho / step).ceil() as i64;
    let mut acc = 0.0;
    for iy in -m..m {
        let y = (iy as f64 + 0.5) * step;
        for ix in -m..m {
            let x = (ix as f64 + 0.5) * step;
            let r = x.hypot(y);
            if r < rho {
                let psi = lfpp_core::gff::bump(eps, r).unwrap();
                acc += psi * (-r * r / (eps * eps)).exp() / (PI * eps * eps);
            }
        }
    }
    acc * step * step
}
