use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{norm, CurrentEvaluator};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, HarmonicsAtPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Xz,
}

impl Plane {
    pub fn label(self) -> &'static str {
        match self {
            Plane::Xy => "xy",
            Plane::Xz => "xz",
        }
    }
}

/// Cell-centred square lattice of current samples spanning
/// `[-extent, extent]` on both in-plane axes.
#[derive(Debug, Clone)]
pub struct PlaneLattice {
    pub plane: Plane,
    pub extent: f64,
    pub resolution: usize,
    pub points: Vec<[f64; 3]>,
    pub j: Vec<[f64; 3]>,
}

pub fn sample_current_plane(
    evaluator: &CurrentEvaluator,
    plane: Plane,
    extent: f64,
    resolution: usize,
) -> Result<PlaneLattice> {
    if resolution < 32 {
        return Err(Error::Parameter {
            name: "resolution",
            reason: format!("{resolution} < 32"),
        });
    }
    if !(extent > 0.0) {
        return Err(Error::Parameter {
            name: "extent",
            reason: format!("{extent} must be positive"),
        });
    }
    let h = 2.0 * extent / resolution as f64;
    let coord = |i: usize| -extent + (i as f64 + 0.5) * h;
    let points: Vec<[f64; 3]> = (0..resolution * resolution)
        .map(|idx| {
            let (a, b) = (coord(idx % resolution), coord(idx / resolution));
            match plane {
                Plane::Xy => [a, b, 0.0],
                Plane::Xz => [a, 0.0, b],
            }
        })
        .collect();
    let j = points
        .par_iter()
        .map(|&p| evaluator.at_harmonics(&HarmonicsAtPoint::new(evaluator.lmax(), p)))
        .collect();
    Ok(PlaneLattice {
        plane,
        extent,
        resolution,
        points,
        j,
    })
}

/// `int |j| dA` over the lattice square, with an `order x order`
/// Gauss-Legendre rule inside each of the `resolution^2` cells.
pub fn integrate_plane_magnitude(
    evaluator: &CurrentEvaluator,
    plane: Plane,
    extent: f64,
    resolution: usize,
    order: usize,
) -> Result<f64> {
    if resolution == 0 || order == 0 || !(extent > 0.0) {
        return Err(Error::Parameter {
            name: "plane quadrature",
            reason: format!("resolution {resolution}, order {order}, extent {extent}"),
        });
    }
    let (x, w) = gauss_legendre(order);
    let h = 2.0 * extent / resolution as f64;
    let rows: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|row| {
            let mut acc = 0.0;
            for col in 0..resolution {
                let (a0, b0) = (-extent + col as f64 * h, -extent + row as f64 * h);
                for (xi, wi) in x.iter().zip(&w) {
                    for (xj, wj) in x.iter().zip(&w) {
                        let a = a0 + 0.5 * h * (xi + 1.0);
                        let b = b0 + 0.5 * h * (xj + 1.0);
                        let p = match plane {
                            Plane::Xy => [a, b, 0.0],
                            Plane::Xz => [a, 0.0, b],
                        };
                        let j = evaluator.at_harmonics(&HarmonicsAtPoint::new(evaluator.lmax(), p));
                        acc += wi * wj * norm(j);
                    }
                }
            }
            acc * 0.25 * h * h
        })
        .collect();
    Ok(rows.iter().sum())
}

impl PlaneLattice {
    pub fn cell_area(&self) -> f64 {
        let h = 2.0 * self.extent / self.resolution as f64;
        h * h
    }

    /// `sum |j| dA`.
    pub fn integrated_magnitude(&self) -> f64 {
        self.j.iter().map(|v| norm(*v)).sum::<f64>() * self.cell_area()
    }

    pub fn is_zero(&self) -> bool {
        self.j.iter().all(|v| *v == [0.0; 3])
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# plane={} extent={} resolution={}",
            self.plane.label(),
            self.extent,
            self.resolution
        )?;
        writeln!(out, "# x y z jx jy jz")?;
        for (p, v) in self.points.iter().zip(&self.j) {
            writeln!(
                out,
                "{:.6} {:.6} {:.6} {:.10e} {:.10e} {:.10e}",
                p[0], p[1], p[2], v[0], v[1], v[2]
            )?;
        }
        Ok(())
    }
}

/// Number of radial maxima of the azimuthally averaged `|j|` in an xy
/// lattice. A maximum counts when it rises at least 5% above the deeper of
/// the minima separating it from its neighbours, and exceeds 1% of the
/// global peak.
pub fn ring_count(lattice: &PlaneLattice) -> Result<usize> {
    if lattice.plane != Plane::Xy {
        return Err(Error::Parameter {
            name: "plane",
            reason: "ring count needs an xy lattice".into(),
        });
    }
    let h = 2.0 * lattice.extent / lattice.resolution as f64;
    let nbins = lattice.resolution / 2;
    let mut sum = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    for (p, v) in lattice.points.iter().zip(&lattice.j) {
        let bin = (p[0].hypot(p[1]) / h) as usize;
        if bin < nbins {
            sum[bin] += norm(*v);
            count[bin] += 1;
        }
    }
    let profile: Vec<f64> = sum
        .iter()
        .zip(&count)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let peak = profile.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0);
    }
    let mut rings = 0;
    for i in 0..profile.len() {
        let v = profile[i];
        let left_ok = i == 0 || profile[i - 1] < v;
        let right_ok = i + 1 == profile.len() || profile[i + 1] <= v;
        if !(left_ok && right_ok) || v < 0.01 * peak {
            continue;
        }
        // deepest dip before reaching something higher on each side
        let mut left_min = v;
        for k in (0..i).rev() {
            if profile[k] > v {
                break;
            }
            left_min = left_min.min(profile[k]);
        }
        let mut right_min = v;
        for &x in &profile[i + 1..] {
            if x > v {
                break;
            }
            right_min = right_min.min(x);
        }
        let base = if i == 0 { right_min } else if i + 1 == profile.len() { left_min } else { left_min.max(right_min) };
        if v >= 1.05 * base || (i == 0 && right_min < v) {
            rings += 1;
        }
    }
    Ok(rings)
}
