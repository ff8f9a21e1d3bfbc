//! Shell model of the fullerene valence and super-atomic orbitals.
//!
//! Orbitals are `R_n(r) * sum_m C_m Y_lm` with one radial function per band
//! and the parabolic dispersion `E_n + l(l+1) / (2 R^2)`. Each band starts
//! from a Gaussian shell; shells are orthogonalized in band order so that
//! orbitals of different bands are orthogonal.

mod symmetry;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use symmetry::{load_symmetry_coefficients, SymmetryState, SymmetryTable};

use crate::error::{Error, Result};
use crate::numerics::HarmonicsAtPoint;

/// Occupied spatial orbitals carry two electrons.
pub const SPIN_DEGENERACY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub n: u32,
    /// Band offset `E_n` in hartree.
    pub offset: f64,
    pub l_max: usize,
    /// Shell radius in bohr.
    pub shell_radius: f64,
    /// Gaussian shell width in bohr.
    pub shell_width: f64,
    pub electron_count: usize,
}

impl BandSpec {
    /// Three-band C60 model: 180 electrons in band 1, 60 in band 2 (l <= 5),
    /// an empty SAMO band 3 (l <= 3) about 8 eV above band 2.
    pub fn c60_defaults() -> Vec<BandSpec> {
        vec![
            BandSpec {
                n: 1,
                offset: -1.4,
                l_max: 9,
                shell_radius: 6.7,
                shell_width: 0.6,
                electron_count: 180,
            },
            BandSpec {
                n: 2,
                offset: -0.30,
                l_max: 5,
                shell_radius: 6.7,
                shell_width: 0.9,
                electron_count: 60,
            },
            BandSpec {
                n: 3,
                offset: -0.30 + 0.294,
                l_max: 3,
                shell_radius: 6.7,
                shell_width: 3.0,
                electron_count: 0,
            },
        ]
    }

    pub fn spatial_orbital_count(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }
}

pub fn parabolic_energy(band: &BandSpec, l: usize, cage_radius: f64) -> Result<f64> {
    if l > band.l_max {
        return Err(Error::Range {
            band: band.n,
            l,
            l_max: band.l_max,
        });
    }
    let lf = l as f64;
    Ok(band.offset + lf * (lf + 1.0) / (2.0 * cage_radius * cage_radius))
}

/// Normalized Gaussian shell `N exp(-(r - R)^2 / (2 sigma^2))` with
/// `int_0^inf |R(r)|^2 r^2 dr = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShell {
    pub center: f64,
    pub width: f64,
    pub norm: f64,
}

// int_0^inf exp(-(r-a)^2/s^2) r^2 dr
fn shell_moment(a: f64, s: f64) -> f64 {
    let i0 = 0.5 * s * PI.sqrt() * (1.0 + libm::erf(a / s));
    let tail = (-(a * a) / (s * s)).exp();
    (0.5 * s * s + a * a) * i0 + 0.5 * s * s * a * tail
}

impl GaussianShell {
    pub fn new(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            norm: shell_moment(center, width).sqrt().recip(),
        }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let d = r - self.center;
        self.norm * (-(d * d) / (2.0 * self.width * self.width)).exp()
    }

    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        let d = r - self.center;
        -d / (self.width * self.width) * self.value(r)
    }

    #[inline]
    pub fn second_derivative(&self, r: f64) -> f64 {
        let s2 = self.width * self.width;
        let d = r - self.center;
        (d * d / s2 - 1.0) / s2 * self.value(r)
    }

    /// `int_0^inf self(r) other(r) r^2 dr`.
    pub fn overlap(&self, other: &GaussianShell) -> f64 {
        let (s1, s2) = (self.width * self.width, other.width * other.width);
        let s = (s1 * s2 / (s1 + s2)).sqrt();
        let c = (self.center * s2 + other.center * s1) / (s1 + s2);
        let d = self.center - other.center;
        let k = (-(d * d) / (2.0 * (s1 + s2))).exp();
        self.norm * other.norm * k * shell_moment(c, std::f64::consts::SQRT_2 * s)
    }
}

/// Band radial function: a linear combination of Gaussian shells, obtained by
/// orthogonalizing each band's shell against all lower bands.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    terms: Vec<(f64, GaussianShell)>,
}

impl RadialProfile {
    pub fn single(center: f64, width: f64) -> Self {
        Self {
            terms: vec![(1.0, GaussianShell::new(center, width))],
        }
    }

    pub fn terms(&self) -> &[(f64, GaussianShell)] {
        &self.terms
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, g)| c * g.value(r)).sum()
    }

    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, g)| c * g.derivative(r)).sum()
    }

    #[inline]
    pub fn second_derivative(&self, r: f64) -> f64 {
        self.terms.iter().map(|(c, g)| c * g.second_derivative(r)).sum()
    }

    pub fn overlap(&self, other: &RadialProfile) -> f64 {
        let mut s = 0.0;
        for (a, ga) in &self.terms {
            for (b, gb) in &other.terms {
                s += a * b * ga.overlap(gb);
            }
        }
        s
    }

    fn axpy(&mut self, alpha: f64, other: &RadialProfile) {
        for (c, g) in &other.terms {
            match self.terms.iter_mut().find(|(_, h)| h == g) {
                Some((d, _)) => *d += alpha * c,
                None => self.terms.push((alpha * c, *g)),
            }
        }
    }

    fn scale(&mut self, alpha: f64) {
        for (c, _) in &mut self.terms {
            *c *= alpha;
        }
    }
}

/// Gram-Schmidt in band order; the lowest band keeps its bare shell.
fn orthogonalized_profiles(bands: &[BandSpec]) -> Vec<RadialProfile> {
    let mut out: Vec<RadialProfile> = Vec::with_capacity(bands.len());
    for band in bands {
        let mut p = RadialProfile::single(band.shell_radius, band.shell_width);
        for _ in 0..2 {
            for q in &out {
                let proj = q.overlap(&p);
                p.axpy(-proj, q);
            }
        }
        let norm = p.overlap(&p).sqrt();
        p.scale(norm.recip());
        out.push(p);
    }
    out
}

/// Bare (not orthogonalized) normalized shell of a band.
pub fn radial_profile(band: &BandSpec, r: f64) -> f64 {
    GaussianShell::new(band.shell_radius, band.shell_width).value(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbital {
    /// Index into `Basis::bands`.
    pub band: usize,
    pub n: u32,
    pub l: usize,
    pub rep: String,
    pub substate: usize,
    /// Hartree.
    pub energy: f64,
    /// `C_m` indexed by `m + l`.
    pub coefficients: Vec<Complex64>,
    pub occupied: bool,
}

impl Orbital {
    /// The `m` of a one-hot orbital, `None` for mixed coefficients.
    pub fn magnetic_number(&self) -> Option<i64> {
        one_hot_m(&self.coefficients, self.l)
    }

    /// `n/l/m`, or `n/l/rep.substate` for symmetry-adapted orbitals.
    pub fn label(&self) -> String {
        match self.magnetic_number() {
            Some(m) => format!("{}/{}/{m}", self.n, self.l),
            None => format!("{}/{}/{}.{}", self.n, self.l, self.rep, self.substate),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ModelConfig {
    pub bands: Vec<BandSpec>,
    /// Averaged molecular radius in the dispersion, bohr.
    pub cage_radius: f64,
    /// Fill order of `m` values for a band's partially occupied shell, keyed
    /// by band number. Defaults to lowest `|m|` first: 0, 1, -1, 2, -2, ...
    pub partial_shell_order: BTreeMap<u32, Vec<i64>>,
    pub symmetry: Option<SymmetryTable>,
}

impl ModelConfig {
    pub fn c60() -> Self {
        Self {
            bands: BandSpec::c60_defaults(),
            cage_radius: 6.7,
            partial_shell_order: BTreeMap::new(),
            symmetry: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Basis {
    pub bands: Vec<BandSpec>,
    pub orbitals: Vec<Orbital>,
    pub cage_radius: f64,
    profiles: Vec<RadialProfile>,
}

fn default_partial_order(l: usize) -> Vec<i64> {
    let mut v = vec![0];
    for m in 1..=l as i64 {
        v.push(m);
        v.push(-m);
    }
    v
}

pub fn build_basis(config: &ModelConfig) -> Result<Basis> {
    if !(config.cage_radius > 0.0) {
        return Err(Error::Config(format!(
            "cage radius must be positive, got {}",
            config.cage_radius
        )));
    }
    let mut orbitals = Vec::new();
    for (bi, band) in config.bands.iter().enumerate() {
        if band.electron_count % 2 != 0 {
            return Err(Error::Config(format!(
                "band {} electron count {} is odd",
                band.n, band.electron_count
            )));
        }
        if band.electron_count > 2 * band.spatial_orbital_count() {
            return Err(Error::Config(format!(
                "band {} holds {} electrons but only {} spatial orbitals (l <= {})",
                band.n,
                band.electron_count,
                band.spatial_orbital_count(),
                band.l_max
            )));
        }
        if !(band.shell_width > 0.0) || !(band.shell_radius >= 0.0) {
            return Err(Error::Config(format!("band {} has an invalid shell profile", band.n)));
        }

        let mut remaining = band.electron_count / 2;
        for l in 0..=band.l_max {
            let energy = parabolic_energy(band, l, config.cage_radius)?;
            let states = substates(config, l)?;
            let n_states = states.len();
            let fill: Vec<bool> = if remaining >= n_states {
                vec![true; n_states]
            } else if remaining == 0 {
                vec![false; n_states]
            } else if states.iter().all(|(_, _, c)| one_hot_m(c, l).is_some()) {
                let order = config
                    .partial_shell_order
                    .get(&band.n)
                    .cloned()
                    .unwrap_or_else(|| default_partial_order(l));
                let chosen: Vec<i64> = order
                    .into_iter()
                    .filter(|m| m.unsigned_abs() as usize <= l)
                    .take(remaining)
                    .collect();
                if chosen.len() < remaining {
                    return Err(Error::Config(format!(
                        "partial shell order supplies {} of {remaining} substates for band {} l = {l}",
                        chosen.len(),
                        band.n
                    )));
                }
                states
                    .iter()
                    .map(|(_, _, c)| chosen.contains(&one_hot_m(c, l).expect("one-hot")))
                    .collect()
            } else {
                // mixed substates: fill in table (representation) order
                (0..n_states).map(|i| i < remaining).collect()
            };
            remaining -= fill.iter().filter(|&&f| f).count();
            for ((rep, substate, coefficients), occupied) in states.into_iter().zip(fill) {
                orbitals.push(Orbital {
                    band: bi,
                    n: band.n,
                    l,
                    rep,
                    substate,
                    energy,
                    coefficients,
                    occupied,
                });
            }
        }
    }
    Ok(Basis {
        bands: config.bands.clone(),
        orbitals,
        cage_radius: config.cage_radius,
        profiles: orthogonalized_profiles(&config.bands),
    })
}

type Substate = (String, usize, Vec<Complex64>);

fn one_hot_m(c: &[Complex64], l: usize) -> Option<i64> {
    let mut found = None;
    for (i, z) in c.iter().enumerate() {
        if z.norm() > 1e-14 {
            if found.is_some() {
                return None;
            }
            found = Some(i as i64 - l as i64);
        }
    }
    found
}

fn substates(config: &ModelConfig, l: usize) -> Result<Vec<Substate>> {
    if let Some(states) = config.symmetry.as_ref().and_then(|t| t.states(l)) {
        if states.len() != 2 * l + 1 {
            return Err(Error::Config(format!(
                "symmetry table lists {} substates for l = {l}, expected {}",
                states.len(),
                2 * l + 1
            )));
        }
        return Ok(states
            .iter()
            .map(|s| (s.rep.clone(), s.substate, s.coefficients.clone()))
            .collect());
    }
    Ok((0..=2 * l)
        .map(|i| {
            let mut c = vec![Complex64::new(0.0, 0.0); 2 * l + 1];
            c[i] = Complex64::new(1.0, 0.0);
            (format!("l{l}"), i, c)
        })
        .collect())
}

impl Basis {
    pub fn profile(&self, band: usize) -> &RadialProfile {
        &self.profiles[band]
    }

    pub fn lmax(&self) -> usize {
        self.orbitals.iter().map(|o| o.l).max().unwrap_or(0)
    }

    /// Orbital indices of the band with principal number `n`.
    pub fn band_orbitals(&self, n: u32) -> Vec<usize> {
        (0..self.orbitals.len())
            .filter(|&i| self.orbitals[i].n == n)
            .collect()
    }

    pub fn occupied(&self, n: u32) -> Vec<usize> {
        self.band_orbitals(n)
            .into_iter()
            .filter(|&i| self.orbitals[i].occupied)
            .collect()
    }

    pub fn unoccupied(&self, n: u32) -> Vec<usize> {
        self.band_orbitals(n)
            .into_iter()
            .filter(|&i| !self.orbitals[i].occupied)
            .collect()
    }

    pub fn electron_count(&self) -> usize {
        2 * self.orbitals.iter().filter(|o| o.occupied).count()
    }

    /// Restrict every band to `l <= l_max`, keeping orbital order.
    pub fn truncated(&self, l_max: &[(u32, usize)]) -> Basis {
        let keep = |o: &Orbital| {
            l_max
                .iter()
                .find(|(n, _)| *n == o.n)
                .map_or(true, |&(_, lm)| o.l <= lm)
        };
        Basis {
            bands: self.bands.clone(),
            orbitals: self.orbitals.iter().filter(|o| keep(o)).cloned().collect(),
            cage_radius: self.cage_radius,
            profiles: self.profiles.clone(),
        }
    }

    pub fn evaluate_orbital(&self, index: usize, point: [f64; 3]) -> Complex64 {
        let o = &self.orbitals[index];
        let h = HarmonicsAtPoint::new(o.l, point);
        self.value_with(index, &h)
    }

    pub fn evaluate_gradient(&self, index: usize, point: [f64; 3]) -> Result<[Complex64; 3]> {
        let o = &self.orbitals[index];
        let h = HarmonicsAtPoint::new(o.l, point);
        if h.r == 0.0 {
            return Err(Error::SingularOrigin);
        }
        Ok(self.value_and_gradient_with(index, &h).1)
    }

    /// Value using precomputed harmonics (`h.lmax() >= l`).
    #[inline]
    pub fn value_with(&self, index: usize, h: &HarmonicsAtPoint) -> Complex64 {
        let o = &self.orbitals[index];
        let radial = self.profiles[o.band].value(h.r);
        angular_sum(o, h) * radial
    }

    /// Value and Cartesian gradient using precomputed harmonics. The caller
    /// guarantees `h.r > 0`.
    #[inline]
    /// Laplacian of an orbital, `(R'' + 2R'/r - l(l+1)R/r^2) Y`.
    pub fn laplacian_with(&self, index: usize, h: &HarmonicsAtPoint) -> Complex64 {
        let o = &self.orbitals[index];
        let prof = &self.profiles[o.band];
        let r = h.r;
        let l = o.l as f64;
        let radial = prof.second_derivative(r) + 2.0 * prof.derivative(r) / r
            - l * (l + 1.0) * prof.value(r) / (r * r);
        let y: Complex64 = o
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(i, c)| c * h.y(o.l, i as i64 - o.l as i64))
            .sum();
        y * radial
    }

    pub fn value_and_gradient_with(&self, index: usize, h: &HarmonicsAtPoint) -> (Complex64, [Complex64; 3]) {
        let o = &self.orbitals[index];
        let prof = &self.profiles[o.band];
        let radial = prof.value(h.r);
        let dradial = prof.derivative(h.r);
        let l = o.l;
        let mut y = Complex64::new(0.0, 0.0);
        let mut g = [Complex64::new(0.0, 0.0); 3];
        for (i, c) in o.coefficients.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let m = i as i64 - l as i64;
            y += c * h.y(l, m);
            let a = h.angular_grad(l, m);
            g[0] += c * a[0];
            g[1] += c * a[1];
            g[2] += c * a[2];
        }
        let over_r = radial / h.r;
        let grad = [
            y * (dradial * h.rhat[0]) + g[0] * over_r,
            y * (dradial * h.rhat[1]) + g[1] * over_r,
            y * (dradial * h.rhat[2]) + g[2] * over_r,
        ];
        (y * radial, grad)
    }
}

#[inline]
fn angular_sum(o: &Orbital, h: &HarmonicsAtPoint) -> Complex64 {
    o.coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(i, c)| c * h.y(o.l, i as i64 - o.l as i64))
        .sum()
}

#[cfg(test)]
mod tests;
