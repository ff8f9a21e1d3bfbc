//! Light-matter matrix elements `<psi_j| H_int |psi_k>` by quadrature.
//!
//! The spatial part of the symmetrized `A.p` coupling acting on `psi` is
//! `-i A.grad(psi) - (i/2) (div A) psi`, with the envelope and the carrier
//! phase factored out.

use std::io::Write;

use num_complex::Complex64;

use crate::beam::VortexPulse;
use crate::error::{Error, Result};
use crate::numerics::{GridSpec, HarmonicsAtPoint, QuadratureGrid};
use crate::structure::Basis;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default relative pruning threshold for transition entries.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Relative grid-doubling change above which an entry is flagged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

#[inline]
fn interaction(a: Complex64, div: Complex64, psi: Complex64, grad_x: Complex64) -> Complex64 {
    -I * (a * grad_x) - 0.5 * I * (div * psi)
}

/// `H_int psi` at `point` for basis orbital `index`.
pub fn apply_interaction(pulse: &VortexPulse, basis: &Basis, index: usize, point: [f64; 3]) -> Result<Complex64> {
    let grad = basis.evaluate_gradient(index, point)?;
    let psi = basis.evaluate_orbital(index, point);
    let (a, div) = pulse.spatial_with_divergence(point);
    Ok(interaction(a, div, psi, grad[0]))
}

/// Grid spec whose angular order covers the product of two orbitals with
/// `l_a`, `l_b` and the vortex phase of `charge`.
pub fn transition_grid_spec(base: GridSpec, l_a: usize, l_b: usize, charge: i32) -> GridSpec {
    let need = l_a + l_b + charge.unsigned_abs() as usize + 2;
    let mut spec = base;
    spec.angular_order = spec.angular_order.max(need + need % 2);
    spec
}

/// `<rows| H_int |cols>` as a row-major matrix, together with the integrals
/// of the absolute integrand, which bound each entry.
fn interaction_block(
    basis: &Basis,
    rows: &[usize],
    cols: &[usize],
    pulse: &VortexPulse,
    grid: &QuadratureGrid,
) -> (Vec<Complex64>, Vec<f64>) {
    let lmax = rows
        .iter()
        .chain(cols)
        .map(|&i| basis.orbitals[i].l)
        .max()
        .unwrap_or(0);
    let (nr, nc) = (rows.len(), cols.len());
    let partials = grid.map_blocks(|range| {
        let mut acc = vec![ZERO; nr * nc];
        let mut abs = vec![0.0; nr * nc];
        let mut bra = vec![ZERO; nr];
        let mut ket = vec![ZERO; nc];
        for i in range {
            let w = grid.weight(i);
            let h = grid.harmonics(i, lmax);
            let p = grid.point(i);
            let (a, div) = pulse.spatial_with_divergence(p);
            for (b, &r) in bra.iter_mut().zip(rows) {
                *b = basis.value_with(r, &h).conj() * w;
            }
            for (k, &c) in ket.iter_mut().zip(cols) {
                let (psi, grad) = basis.value_and_gradient_with(c, &h);
                *k = interaction(a, div, psi, grad[0]);
            }
            for (ri, b) in bra.iter().enumerate() {
                let row = &mut acc[ri * nc..(ri + 1) * nc];
                let arow = &mut abs[ri * nc..(ri + 1) * nc];
                for ((dst, adst), k) in row.iter_mut().zip(arow.iter_mut()).zip(&ket) {
                    let v = b * k;
                    *dst += v;
                    *adst += v.norm();
                }
            }
        }
        (acc, abs)
    });
    let mut acc = vec![ZERO; nr * nc];
    let mut abs = vec![0.0; nr * nc];
    for (pa, pb) in &partials {
        for (d, s) in acc.iter_mut().zip(pa) {
            *d += s;
        }
        for (d, s) in abs.iter_mut().zip(pb) {
            *d += s;
        }
    }
    (acc, abs)
}

/// `<psi_j| H_int |psi_k>`.
pub fn matrix_element(basis: &Basis, k: usize, j: usize, pulse: &VortexPulse, grid: &QuadratureGrid) -> Complex64 {
    interaction_block(basis, &[j], &[k], pulse, grid).0[0]
}

/// Relative change of `matrix_element` when the grid is doubled.
pub fn matrix_element_convergence(
    basis: &Basis,
    k: usize,
    j: usize,
    pulse: &VortexPulse,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let (m, scale) = interaction_block(basis, &[j], &[k], pulse, grid);
    let fine = matrix_element(basis, k, j, pulse, &grid.refined()?);
    Ok((fine - m[0]).norm() / fine.norm().max(1e-10 * scale[0]).max(f64::MIN_POSITIVE))
}

/// Full `<a| H_int |b>` over `indices` (row `a`, column `b`).
pub fn interaction_matrix(
    basis: &Basis,
    indices: &[usize],
    pulse: &VortexPulse,
    grid: &QuadratureGrid,
) -> Vec<Complex64> {
    interaction_block(basis, indices, indices, pulse, grid).0
}

/// Which orbitals are coupled: occupied orbitals of `source_band` to
/// unoccupied orbitals of `target_band`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSpec {
    pub source_band: u32,
    pub target_band: u32,
    pub prune_threshold: f64,
}

impl Default for TransitionSpec {
    fn default() -> Self {
        Self {
            source_band: 2,
            target_band: 3,
            prune_threshold: PRUNE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSummary {
    pub spec: GridSpec,
    pub points: usize,
}

/// Matrix elements between every source and target orbital.
#[derive(Debug, Clone)]
pub struct TransitionSet {
    /// Occupied orbital indices (rows).
    pub sources: Vec<usize>,
    /// Unoccupied orbital indices (columns).
    pub targets: Vec<usize>,
    raw: Vec<Complex64>,
    bound: Vec<f64>,
    pruned: Vec<bool>,
    pub pulse: VortexPulse,
    pub grid: GridSummary,
    /// Per-entry relative change under grid doubling, if estimated.
    pub convergence: Option<Vec<f64>>,
}

impl TransitionSet {
    #[inline]
    fn at(&self, s: usize, t: usize) -> usize {
        s * self.targets.len() + t
    }

    /// Entry with pruning applied.
    #[inline]
    pub fn get(&self, s: usize, t: usize) -> Complex64 {
        let i = self.at(s, t);
        if self.pruned[i] {
            ZERO
        } else {
            self.raw[i]
        }
    }

    /// Entry as integrated, before pruning.
    #[inline]
    pub fn raw(&self, s: usize, t: usize) -> Complex64 {
        self.raw[self.at(s, t)]
    }

    /// `int |psi_t^* H_int psi_s|`, an upper bound on `|M|`.
    #[inline]
    pub fn bound(&self, s: usize, t: usize) -> f64 {
        self.bound[self.at(s, t)]
    }

    pub fn is_pruned(&self, s: usize, t: usize) -> bool {
        self.pruned[self.at(s, t)]
    }

    pub fn pruned_count(&self) -> usize {
        self.pruned.iter().filter(|&&p| p).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.raw.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    /// True when the entry is a cancellation zero: `|M|` is below `tol`
    /// times the integral of the absolute integrand.
    pub fn is_structural_zero(&self, s: usize, t: usize, tol: f64) -> bool {
        let i = self.at(s, t);
        self.raw[i].norm() <= tol * self.bound[i]
    }

    /// `(source index, target index, M)` with pruning applied.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let nt = self.targets.len();
        (0..self.raw.len()).map(move |i| (i / nt, i % nt, self.get(i / nt, i % nt)))
    }

    /// Same entries scaled by `s`, as for a pulse with amplitude scaled by `s`.
    pub fn scaled(&self, s: f64) -> TransitionSet {
        let mut out = self.clone();
        for m in &mut out.raw {
            *m *= s;
        }
        for b in &mut out.bound {
            *b *= s.abs();
        }
        out.pulse = self.pulse.with_a0(self.pulse.a0 * s);
        out
    }

    /// Estimates convergence by recomputing on a doubled grid. Returns the
    /// entries whose relative change exceeds [`CONVERGENCE_TOLERANCE`].
    pub fn estimate_convergence(&mut self, basis: &Basis, grid: &QuadratureGrid) -> Result<Vec<(usize, usize)>> {
        let fine = grid.refined()?;
        let (m, _) = interaction_block(basis, &self.targets, &self.sources, &self.pulse, &fine);
        let floor = 1e-10 * self.max_abs();
        let nt = self.targets.len();
        let mut change = vec![0.0; self.raw.len()];
        let mut flagged = Vec::new();
        for s in 0..self.sources.len() {
            for t in 0..nt {
                let f = m[t * self.sources.len() + s];
                let c = (f - self.raw(s, t)).norm() / f.norm().max(floor).max(f64::MIN_POSITIVE);
                change[s * nt + t] = c;
                if c > CONVERGENCE_TOLERANCE && f.norm() > floor {
                    flagged.push((s, t));
                }
            }
        }
        self.convergence = Some(change);
        Ok(flagged)
    }

    /// Text table `k j l_k m_k l_j m_j Re(M) Im(M)`; `m` is printed as `*`
    /// for orbitals without a single magnetic number.
    pub fn write_table<W: Write>(&self, basis: &Basis, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# k j l_k m_k l_j m_j re_m im_m")?;
        writeln!(out, "# pruned {} of {}", self.pruned_count(), self.raw.len())?;
        let label = |i: usize| {
            let o = &basis.orbitals[i];
            let m = o.magnetic_number().map_or("*".to_string(), |m| m.to_string());
            (o.l, m)
        };
        for (s, t, m) in self.entries() {
            let (k, j) = (self.sources[s], self.targets[t]);
            let (lk, mk) = label(k);
            let (lj, mj) = label(j);
            writeln!(out, "{k} {j} {lk} {mk} {lj} {mj} {:.12e} {:.12e}", m.re, m.im)?;
        }
        Ok(())
    }
}

/// Matrix elements for all source/target pairs.
pub fn build_transition_set(
    basis: &Basis,
    pulse: &VortexPulse,
    grid: &QuadratureGrid,
    spec: &TransitionSpec,
) -> Result<TransitionSet> {
    let sources = basis.occupied(spec.source_band);
    let targets = basis.unoccupied(spec.target_band);
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::Config(format!(
            "need occupied orbitals in band {} and unoccupied orbitals in band {}",
            spec.source_band, spec.target_band
        )));
    }
    let (m, b) = interaction_block(basis, &targets, &sources, pulse, grid);
    let (ns, nt) = (sources.len(), targets.len());
    let mut raw = vec![ZERO; ns * nt];
    let mut bound = vec![0.0; ns * nt];
    for t in 0..nt {
        for s in 0..ns {
            raw[s * nt + t] = m[t * ns + s];
            bound[s * nt + t] = b[t * ns + s];
        }
    }
    let max = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pruned = raw.iter().map(|z| z.norm() < spec.prune_threshold * max).collect();
    Ok(TransitionSet {
        sources,
        targets,
        raw,
        bound,
        pruned,
        pulse: pulse.clone(),
        grid: GridSummary {
            spec: grid.spec,
            points: grid.len(),
        },
        convergence: None,
    })
}

/// Same as [`matrix_element`] but with the beam and the orbitals expressed in
/// a frame whose origin sits at `origin` in cage coordinates: orbitals are
/// evaluated relative to the cage centre, the beam at absolute positions.
pub fn matrix_element_in_frame(
    basis: &Basis,
    k: usize,
    j: usize,
    pulse: &VortexPulse,
    grid: &QuadratureGrid,
    origin: [f64; 2],
) -> Complex64 {
    // beam axis and cage centre both moved by -origin
    let shifted = pulse.with_axis([pulse.axis[0] - origin[0], pulse.axis[1] - origin[1]]);
    let cage = [-origin[0], -origin[1], 0.0];
    let lmax = basis.orbitals[k].l.max(basis.orbitals[j].l);
    let parts = grid.map_blocks(|range| {
        let mut acc = ZERO;
        for i in range {
            let q = grid.point(i);
            let lab = [q[0] + cage[0], q[1] + cage[1], q[2]];
            let rel = [lab[0] - cage[0], lab[1] - cage[1], lab[2]];
            let h = HarmonicsAtPoint::new(lmax, rel);
            let (psi, grad) = basis.value_and_gradient_with(k, &h);
            let (a, div) = shifted.spatial_with_divergence(lab);
            acc += basis.value_with(j, &h).conj() * interaction(a, div, psi, grad[0]) * grid.weight(i);
        }
        acc
    });
    parts.iter().sum()
}
