//! Post-pulse DC current, its magnetic moment and the field at the cage
//! centre.
//!
//! Only orbitals within one degenerate manifold interfere in the time
//! average, so the current is
//! `j = 2 sum_k sum_groups sum_{a,b} Im[conj(B_ak) B_bk conj(psi_a) grad psi_b]`
//! where the factor 2 is the spin degeneracy.

mod plane;
mod ring;

pub use plane::{integrate_plane_magnitude, ring_count, sample_current_plane, Plane, PlaneLattice};
pub use ring::synthetic_ring;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ExcitationState;
use crate::error::{Error, Result};
use crate::numerics::constants::{ATOMIC_BFIELD_IN_T, BOHR_MAGNETON_AU, FINE_STRUCTURE};
use crate::numerics::{CompensatedComplex, CompensatedSum, HarmonicsAtPoint, QuadratureGrid};
use crate::structure::{Basis, SPIN_DEGENERACY};

/// Energy window within which excited orbitals count as degenerate, hartree.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;

/// Radius of the ball around the origin left out of the field integral, bohr.
pub const R_CUT: f64 = 0.5;

/// Largest relative pointwise divergence accepted for a DC current.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;

/// Boundary current, relative to the peak, above which a warning is issued.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How stored current samples enter moment and field integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurrentConvention {
    /// Samples are electron probability current; multiplied by the electron
    /// charge (-1) before integrating.
    #[default]
    Charge,
    /// Samples are used as given.
    Probability,
}

impl CurrentConvention {
    /// Factor applied to probability-current samples.
    pub fn sign(self) -> f64 {
        match self {
            CurrentConvention::Charge => -1.0,
            CurrentConvention::Probability => 1.0,
        }
    }
}

/// Groups of target positions whose energies chain within `eta`.
pub fn degenerate_groups(basis: &Basis, targets: &[usize], eta: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| {
        basis.orbitals[targets[a]]
            .energy
            .total_cmp(&basis.orbitals[targets[b]].energy)
            .then(a.cmp(&b))
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for pos in order {
        let e = basis.orbitals[targets[pos]].energy;
        match groups.last_mut() {
            Some(g) if (e - last).abs() < eta => g.push(pos),
            _ => groups.push(vec![pos]),
        }
        last = e;
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

#[derive(Debug, Clone)]
struct Group {
    orbitals: Vec<usize>,
    // D_ab = sum_k conj(B_ak) B_bk
    density: Vec<Complex64>,
}

/// Evaluates the DC current of an excitation at arbitrary points.
#[derive(Debug, Clone)]
pub struct CurrentEvaluator<'a> {
    basis: &'a Basis,
    groups: Vec<Group>,
    lmax: usize,
}

impl<'a> CurrentEvaluator<'a> {
    pub fn new(excitation: &ExcitationState, basis: &'a Basis, eta: f64) -> Self {
        let groups = degenerate_groups(basis, &excitation.targets, eta)
            .into_iter()
            .map(|members| {
                let n = members.len();
                let mut acc = vec![CompensatedComplex::default(); n * n];
                for s in 0..excitation.sources.len() {
                    for (a, &ta) in members.iter().enumerate() {
                        let ba = excitation.amplitude(s, ta).conj();
                        if ba == ZERO {
                            continue;
                        }
                        for (b, &tb) in members.iter().enumerate() {
                            acc[a * n + b].add(ba * excitation.amplitude(s, tb));
                        }
                    }
                }
                Group {
                    orbitals: members.iter().map(|&t| excitation.targets[t]).collect(),
                    density: acc.iter().map(|c| c.value()).collect(),
                }
            })
            .filter(|g| g.density.iter().any(|&d| d != ZERO))
            .collect::<Vec<_>>();
        let lmax = groups
            .iter()
            .flat_map(|g| g.orbitals.iter().map(|&i| basis.orbitals[i].l))
            .max()
            .unwrap_or(0);
        Self { basis, groups, lmax }
    }

    /// True when no amplitude is nonzero.
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn at(&self, point: [f64; 3]) -> Result<[f64; 3]> {
        if point == [0.0; 3] {
            return Err(Error::SingularOrigin);
        }
        Ok(self.at_harmonics(&HarmonicsAtPoint::new(self.lmax, point)))
    }

    pub fn at_harmonics(&self, h: &HarmonicsAtPoint) -> [f64; 3] {
        let mut j = [CompensatedSum::default(); 3];
        let mut vals = Vec::new();
        let mut grads = Vec::new();
        for g in &self.groups {
            vals.clear();
            grads.clear();
            for &i in &g.orbitals {
                let (v, d) = self.basis.value_and_gradient_with(i, h);
                vals.push(v.conj());
                grads.push(d);
            }
            let n = g.orbitals.len();
            for a in 0..n {
                for b in 0..n {
                    let w = g.density[a * n + b] * vals[a];
                    for c in 0..3 {
                        j[c].add((w * grads[b][c]).im);
                    }
                }
            }
        }
        j.map(|x| SPIN_DEGENERACY * x.value())
    }

    /// `div j = 2 Im sum D_ab conj(psi_a) lap psi_b` (times spin).
    pub fn divergence_harmonics(&self, h: &HarmonicsAtPoint) -> f64 {
        let mut acc = 0.0;
        for g in &self.groups {
            let n = g.orbitals.len();
            let vals: Vec<Complex64> = g.orbitals.iter().map(|&i| self.basis.value_with(i, h).conj()).collect();
            let laps: Vec<Complex64> = g.orbitals.iter().map(|&i| self.basis.laplacian_with(i, h)).collect();
            for a in 0..n {
                for b in 0..n {
                    acc += (g.density[a * n + b] * vals[a] * laps[b]).im;
                }
            }
        }
        SPIN_DEGENERACY * acc
    }
}

/// DC probability current at one point with the default degeneracy window.
pub fn dc_current_density(excitation: &ExcitationState, basis: &Basis, point: [f64; 3]) -> Result<[f64; 3]> {
    CurrentEvaluator::new(excitation, basis, DEGENERACY_TOLERANCE).at(point)
}

/// Current density sampled at weighted points.
#[derive(Debug, Clone)]
pub struct CurrentField {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub j: Vec<[f64; 3]>,
    pub convention: CurrentConvention,
    /// Largest `|j|` on the innermost radial shell over the largest `|j|`,
    /// when sampled on a spherical grid.
    pub boundary_ratio: Option<f64>,
}

impl CurrentField {
    pub fn max_abs(&self) -> f64 {
        self.j.iter().map(|v| norm(*v)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> CurrentField {
        let mut out = self.clone();
        for v in &mut out.j {
            *v = v.map(|c| c * s);
        }
        out
    }

    /// `sum w |j|^2` as an L2 norm.
    pub fn l2_norm(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.j)
            .map(|(w, v)| w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
            .sum::<f64>()
            .sqrt()
    }
}

#[inline]
fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Samples the current at every grid node.
pub fn sample_current(evaluator: &CurrentEvaluator, grid: &QuadratureGrid, convention: CurrentConvention) -> CurrentField {
    let blocks = grid.map_blocks(|range| {
        range
            .map(|i| evaluator.at_harmonics(&grid.harmonics(i, evaluator.lmax)))
            .collect::<Vec<_>>()
    });
    let j: Vec<[f64; 3]> = blocks.into_iter().flatten().collect();
    let points = (0..grid.len()).map(|i| grid.point(i)).collect();
    let weights = (0..grid.len()).map(|i| grid.weight(i)).collect();
    let max = j.iter().map(|v| norm(*v)).fold(0.0, f64::max);
    let inner = j[..grid.n_angular()].iter().map(|v| norm(*v)).fold(0.0, f64::max);
    CurrentField {
        points,
        weights,
        j,
        convention,
        boundary_ratio: Some(if max > 0.0 { inner / max } else { 0.0 }),
    }
}

/// `(1/2) int r x j` in atomic units (`e hbar / m_e`), convention applied.
pub fn magnetic_moment(field: &CurrentField) -> [f64; 3] {
    let mut m = [0.0; 3];
    for ((p, w), v) in field.points.iter().zip(&field.weights).zip(&field.j) {
        let c = cross(*p, *v);
        for k in 0..3 {
            m[k] += w * c[k];
        }
    }
    m.map(|x| 0.5 * field.convention.sign() * x)
}

/// Biot-Savart field at the origin, `alpha^2 int r x j / r^3`, in atomic
/// units. Points inside [`R_CUT`] are skipped.
pub fn b_field_center(field: &CurrentField) -> [f64; 3] {
    b_field_center_with(field, R_CUT)
}

pub fn b_field_center_with(field: &CurrentField, r_cut: f64) -> [f64; 3] {
    let mut b = [0.0; 3];
    for ((p, w), v) in field.points.iter().zip(&field.weights).zip(&field.j) {
        let r = norm(*p);
        if r < r_cut {
            continue;
        }
        let c = cross(*p, *v);
        for k in 0..3 {
            b[k] += w * c[k] / (r * r * r);
        }
    }
    let mu0_over_4pi = FINE_STRUCTURE * FINE_STRUCTURE;
    b.map(|x| mu0_over_4pi * field.convention.sign() * x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagneticsResult {
    /// Atomic units, `e hbar / m_e`.
    pub moment: [f64; 3],
    pub moment_bohr_magnetons: [f64; 3],
    /// Atomic units.
    pub b_center: [f64; 3],
    pub b_center_tesla: [f64; 3],
    /// Radius of the current loop reproducing both `m_z` and `B_z`, bohr.
    pub effective_radius: Option<f64>,
    pub warnings: Vec<String>,
}

impl MagneticsResult {
    pub fn moment_transverse(&self) -> f64 {
        self.moment[0].hypot(self.moment[1])
    }
}

pub fn magnetics(field: &CurrentField) -> MagneticsResult {
    magnetics_with(field, R_CUT)
}

pub fn magnetics_with(field: &CurrentField, r_cut: f64) -> MagneticsResult {
    let moment = magnetic_moment(field);
    let b_center = b_field_center_with(field, r_cut);
    let mut warnings = Vec::new();
    if let Some(ratio) = field.boundary_ratio {
        if ratio > BOUNDARY_TOLERANCE {
            warnings.push(format!(
                "current on the exclusion boundary is {ratio:.3e} of its peak (tolerance {BOUNDARY_TOLERANCE:.0e})"
            ));
        }
    }
    let alpha2 = FINE_STRUCTURE * FINE_STRUCTURE;
    let effective_radius = (moment[2] * b_center[2] > 0.0).then(|| (2.0 * alpha2 * moment[2] / b_center[2]).cbrt());
    MagneticsResult {
        moment,
        moment_bohr_magnetons: moment.map(|x| x / BOHR_MAGNETON_AU),
        b_center,
        b_center_tesla: b_center.map(|x| x * ATOMIC_BFIELD_IN_T),
        effective_radius,
        warnings,
    }
}

/// L2 norms of the cylindrical components of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylindricalNorms {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
}

pub fn cylindrical_decomposition(field: &CurrentField) -> CylindricalNorms {
    let (mut r, mut f, mut z) = (0.0, 0.0, 0.0);
    for ((p, w), v) in field.points.iter().zip(&field.weights).zip(&field.j) {
        let rho = p[0].hypot(p[1]);
        let (c, s) = if rho > 0.0 { (p[0] / rho, p[1] / rho) } else { (1.0, 0.0) };
        let jr = c * v[0] + s * v[1];
        let jf = -s * v[0] + c * v[1];
        r += w * jr * jr;
        f += w * jf * jf;
        z += w * v[2] * v[2];
    }
    CylindricalNorms {
        rho: r.sqrt(),
        phi: f.sqrt(),
        z: z.sqrt(),
    }
}

/// Relative pointwise divergence `R ||div j|| / ||j||` on the grid, with `R`
/// the cage radius. Vanishes when only degenerate orbitals interfere.
pub fn divergence_diagnostic(evaluator: &CurrentEvaluator, grid: &QuadratureGrid) -> f64 {
    let parts = grid.map_blocks(|range| {
        let (mut d2, mut j2) = (0.0, 0.0);
        for i in range {
            let h = grid.harmonics(i, evaluator.lmax);
            let w = grid.weight(i);
            let d = evaluator.divergence_harmonics(&h);
            let j = evaluator.at_harmonics(&h);
            d2 += w * d * d;
            j2 += w * (j[0] * j[0] + j[1] * j[1] + j[2] * j[2]);
        }
        (d2, j2)
    });
    let (d2, j2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if j2 == 0.0 {
        return 0.0;
    }
    evaluator.basis.cage_radius * d2.sqrt() / j2.sqrt()
}

/// Spread of `j_phi` around a circle of radius `radius` at height `z`:
/// `max |j_phi - mean| / |mean|` over `n` equally spaced azimuths.
pub fn azimuthal_variation(evaluator: &CurrentEvaluator, radius: f64, z: f64, n: usize) -> Result<f64> {
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let phi = std::f64::consts::TAU * k as f64 / n as f64;
        let (s, c) = phi.sin_cos();
        let j = evaluator.at([radius * c, radius * s, z])?;
        vals.push(-s * j[0] + c * j[1]);
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    if mean == 0.0 {
        return Ok(0.0);
    }
    Ok(vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs())
}

#[cfg(test)]
mod tests;
