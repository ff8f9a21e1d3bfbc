//! Orthonormal associated Legendre functions and spherical harmonics.
//!
//! Convention: Condon-Shortley phase, `Y_lm(theta, phi) = Pbar_l^m(cos theta) e^{i m phi}`
//! with `Pbar` normalized so that the `Y_lm` are orthonormal on the unit sphere,
//! and `Y_{l,-m} = (-1)^m conj(Y_lm)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// `Pbar_l^m(x)` for all `0 <= m <= l <= lmax`, plus `Pbar_l^m(x) / sin(theta)`
/// for `m >= 1`, which stays finite at the poles.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    values: Vec<f64>,
    over_sin: Vec<f64>,
}

impl LegendreTable {
    pub fn new(lmax: usize, x: f64) -> Self {
        let x = x.clamp(-1.0, 1.0);
        let s = (1.0 - x * x).max(0.0).sqrt();
        let n = tri(lmax, lmax) + 1;
        let mut values = vec![0.0; n];
        let mut over_sin = vec![0.0; n];
        fill_columns(lmax, x, s, false, &mut values);
        fill_columns(lmax, x, s, true, &mut over_sin);
        Self {
            lmax,
            values,
            over_sin,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// `Pbar_l^m` for `m >= 0`.
    #[inline]
    pub fn p(&self, l: usize, m: usize) -> f64 {
        self.values[tri(l, m)]
    }

    /// `Pbar_l^m / sin(theta)` for `m >= 1`.
    #[inline]
    pub fn p_over_sin(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m >= 1);
        self.over_sin[tri(l, m)]
    }

    /// Signed-order access using `Pbar_l^{-m} = (-1)^m Pbar_l^m`.
    #[inline]
    fn p_signed(&self, l: usize, m: i64) -> f64 {
        let ma = m.unsigned_abs() as usize;
        if ma > l {
            return 0.0;
        }
        let v = self.p(l, ma);
        if m < 0 && ma % 2 == 1 {
            -v
        } else {
            v
        }
    }

    /// `d Pbar_l^m / d theta` for `m >= 0`, via the ladder identity.
    pub fn dtheta(&self, l: usize, m: usize) -> f64 {
        let (lf, mf) = (l as f64, m as f64);
        let up = ((lf - mf) * (lf + mf + 1.0)).sqrt() * self.p_signed(l, m as i64 + 1);
        let down = ((lf + mf) * (lf - mf + 1.0)).sqrt() * self.p_signed(l, m as i64 - 1);
        0.5 * (up - down)
    }
}

// Column-wise upward recurrence in l at fixed m. With `reduced` the seed
// carries one power of sin(theta) fewer, which yields Pbar/sin(theta).
fn fill_columns(lmax: usize, x: f64, s: f64, reduced: bool, out: &mut [f64]) {
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
            if !(reduced && m == 1) {
                pmm *= s;
            }
        }
        if reduced && m == 0 {
            continue;
        }
        out[tri(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mut prev2 = pmm;
        let mut prev1 = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
        out[tri(m + 1, m)] = prev1;
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let cur = a * (x * prev1 - b * prev2);
            out[tri(l, m)] = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
}

/// Normalized associated Legendre value `Pbar_l^m(x)` (signed `m` allowed).
pub fn assoc_legendre(l: i64, m: i64, x: f64) -> Result<f64> {
    if l < 0 || m.abs() > l {
        return Err(Error::InvalidDegree { l, m });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Parameter {
            name: "x",
            reason: format!("{x} outside [-1, 1]"),
        });
    }
    let table = LegendreTable::new(l as usize, x);
    Ok(table.p_signed(l as usize, m))
}

/// `Y_lm(theta, phi)`.
pub fn spherical_harmonic(l: i64, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let p = assoc_legendre(l, m, theta.cos())?;
    Ok(Complex64::from_polar(1.0, m as f64 * phi) * p)
}

/// All spherical harmonics up to `lmax` at one direction, together with the
/// Cartesian angular gradient `r grad Y_lm` (the part of the gradient that
/// does not act on the radial coordinate).
#[derive(Debug, Clone)]
pub struct HarmonicsAtPoint {
    lmax: usize,
    pub r: f64,
    pub rhat: [f64; 3],
    values: Vec<Complex64>,
    angular_grad: Vec<[Complex64; 3]>,
}

#[inline]
fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

impl HarmonicsAtPoint {
    /// Direction taken from a Cartesian point; at the origin the direction is
    /// the +z axis (callers that care must reject r = 0 themselves).
    pub fn new(lmax: usize, point: [f64; 3]) -> Self {
        let [x, y, z] = point;
        let rho = x.hypot(y);
        let r = rho.hypot(z);
        let (ct, st) = if r > 0.0 { (z / r, rho / r) } else { (1.0, 0.0) };
        let (cp, sp) = if rho > 0.0 { (x / rho, y / rho) } else { (1.0, 0.0) };
        Self::from_angles(lmax, r, ct, st, cp, sp)
    }

    pub fn from_angles(lmax: usize, r: f64, ct: f64, st: f64, cp: f64, sp: f64) -> Self {
        let table = LegendreTable::new(lmax, ct);
        let rhat = [st * cp, st * sp, ct];
        let that = [ct * cp, ct * sp, -st];
        let phat = [-sp, cp, 0.0];
        let size = (lmax + 1) * (lmax + 1);
        let mut values = vec![Complex64::new(0.0, 0.0); size];
        let mut angular_grad = vec![[Complex64::new(0.0, 0.0); 3]; size];
        let base = Complex64::new(cp, sp);
        let mut phase = Complex64::new(1.0, 0.0);
        for m in 0..=lmax {
            if m > 0 {
                phase *= base;
            }
            for l in m..=lmax {
                let p = table.p(l, m);
                let dp = table.dtheta(l, m);
                let y = phase * p;
                let g_theta = phase * dp;
                let g_phi = if m == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    phase * Complex64::new(0.0, m as f64 * table.p_over_sin(l, m))
                };
                let g = [
                    g_theta * that[0] + g_phi * phat[0],
                    g_theta * that[1] + g_phi * phat[1],
                    g_theta * that[2] + g_phi * phat[2],
                ];
                values[lm_index(l, m as i64)] = y;
                angular_grad[lm_index(l, m as i64)] = g;
                if m > 0 {
                    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                    values[lm_index(l, -(m as i64))] = y.conj() * sign;
                    angular_grad[lm_index(l, -(m as i64))] =
                        [g[0].conj() * sign, g[1].conj() * sign, g[2].conj() * sign];
                }
            }
        }
        Self {
            lmax,
            r,
            rhat,
            values,
            angular_grad,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    #[inline]
    pub fn y(&self, l: usize, m: i64) -> Complex64 {
        self.values[lm_index(l, m)]
    }

    /// `r * grad Y_lm` in Cartesian components.
    #[inline]
    pub fn angular_grad(&self, l: usize, m: i64) -> [Complex64; 3] {
        self.angular_grad[lm_index(l, m)]
    }
}
