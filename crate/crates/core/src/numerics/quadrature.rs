//! Product quadrature on balls and spherical shells.
//!
//! Radial: Gauss-Legendre mapped to `[r_min, r_max]` with the `r^2` Jacobian
//! folded into the weights. Angular: Gauss-Legendre in `cos(theta)` times a
//! uniform trapezoid rule in `phi`, exact for every spherical-harmonic
//! product of combined degree up to `angular_order`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::HarmonicsAtPoint;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub radial_nodes: usize,
    /// Highest combined spherical-harmonic degree integrated exactly.
    pub angular_order: usize,
    /// Largest orbital angular momentum the grid must resolve.
    pub basis_lmax: usize,
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub radial_nodes: Vec<f64>,
    /// Gauss-Legendre weight times `r^2`.
    pub radial_weights: Vec<f64>,
    pub angular_nodes: Vec<[f64; 3]>,
    pub angular_weights: Vec<f64>,
    pub n_r: usize,
    pub l_quad: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub spec: GridSpec,
    // (cos theta, sin theta, cos phi, sin phi) per angular node
    angles: Vec<[f64; 4]>,
}

pub fn build_grid(spec: GridSpec) -> Result<QuadratureGrid> {
    let GridSpec {
        r_min,
        r_max,
        radial_nodes,
        angular_order,
        basis_lmax,
    } = spec;
    if !(r_min >= 0.0) {
        return Err(Error::Parameter {
            name: "r_min",
            reason: format!("{r_min} must be non-negative"),
        });
    }
    if !(r_max > r_min) {
        return Err(Error::Parameter {
            name: "r_max",
            reason: format!("{r_max} must exceed r_min = {r_min}"),
        });
    }
    if radial_nodes < 16 {
        return Err(Error::Parameter {
            name: "radial_nodes",
            reason: format!("{radial_nodes} < 16"),
        });
    }
    if angular_order < 2 * basis_lmax + 4 {
        return Err(Error::Parameter {
            name: "angular_order",
            reason: format!(
                "{angular_order} is below 2*l_max+4 = {} for basis l_max {basis_lmax}",
                2 * basis_lmax + 4
            ),
        });
    }

    let (x, w) = gauss_legendre(radial_nodes);
    let half = 0.5 * (r_max - r_min);
    let mid = 0.5 * (r_max + r_min);
    let rn: Vec<f64> = x.iter().map(|&t| mid + half * t).collect();
    let rw: Vec<f64> = w.iter().zip(&rn).map(|(&wi, &r)| wi * half * r * r).collect();

    let n_theta = angular_order / 2 + 1;
    let n_phi = angular_order + 1;
    let (ct, wt) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut angular_nodes = Vec::with_capacity(n_theta * n_phi);
    let mut angular_weights = Vec::with_capacity(n_theta * n_phi);
    let mut angles = Vec::with_capacity(n_theta * n_phi);
    for (&c, &wc) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for k in 0..n_phi {
            let phi = k as f64 * dphi;
            let (sp, cp) = phi.sin_cos();
            angular_nodes.push([s * cp, s * sp, c]);
            angular_weights.push(wc * dphi);
            angles.push([c, s, cp, sp]);
        }
    }

    Ok(QuadratureGrid {
        radial_nodes: rn,
        radial_weights: rw,
        angular_nodes,
        angular_weights,
        n_r: radial_nodes,
        l_quad: angular_order,
        n_theta,
        n_phi,
        spec,
        angles,
    })
}

impl QuadratureGrid {
    /// Grid with twice the radial nodes and angular order.
    pub fn refined(&self) -> Result<QuadratureGrid> {
        build_grid(GridSpec {
            radial_nodes: 2 * self.spec.radial_nodes,
            angular_order: 2 * self.spec.angular_order,
            ..self.spec
        })
    }

    pub fn len(&self) -> usize {
        self.radial_nodes.len() * self.angular_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_angular(&self) -> usize {
        self.angular_nodes.len()
    }

    #[inline]
    pub fn point(&self, i: usize) -> [f64; 3] {
        let na = self.angular_nodes.len();
        let r = self.radial_nodes[i / na];
        let u = self.angular_nodes[i % na];
        [r * u[0], r * u[1], r * u[2]]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let na = self.angular_nodes.len();
        self.radial_weights[i / na] * self.angular_weights[i % na]
    }

    /// `(r, cos theta, sin theta, cos phi, sin phi)` of point `i`.
    #[inline]
    pub fn spherical(&self, i: usize) -> (f64, [f64; 4]) {
        let na = self.angular_nodes.len();
        (self.radial_nodes[i / na], self.angles[i % na])
    }

    pub fn r_min_node(&self) -> f64 {
        self.radial_nodes[0]
    }

    /// Spherical harmonics up to `lmax` at point `i`.
    pub fn harmonics(&self, i: usize, lmax: usize) -> HarmonicsAtPoint {
        let (r, [ct, st, cp, sp]) = self.spherical(i);
        HarmonicsAtPoint::from_angles(lmax, r, ct, st, cp, sp)
    }

    /// Applies `f` to each fixed block of point indices and returns the
    /// per-block results in block order.
    pub fn map_blocks<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(std::ops::Range<usize>) -> T + Sync,
    {
        use rayon::prelude::*;
        let n = self.len();
        (0..n.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| f(b * BLOCK..((b + 1) * BLOCK).min(n)))
            .collect()
    }

    /// Weighted sum of `f` over the grid, accumulated in fixed-size blocks
    /// whose partial sums are added in order, so the result does not depend
    /// on how many threads evaluate the blocks.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let n = self.len();
        let blocks: Vec<f64> = (0..n.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let end = ((b + 1) * BLOCK).min(n);
                (b * BLOCK..end).map(|i| self.weight(i) * f(self.point(i))).sum()
            })
            .collect();
        blocks.iter().sum()
    }
}

/// Block size for deterministic parallel accumulation.
pub const BLOCK: usize = 512;
