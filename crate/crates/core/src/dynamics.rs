//! First-order amplitudes after the pulse and a direct-propagation oracle.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::beam::VortexPulse;
use crate::coupling::{interaction_matrix, TransitionSet};
use crate::error::{Error, Result};
use crate::numerics::QuadratureGrid;
use crate::structure::Basis;

/// Default ceiling on the total excited population per source orbital.
pub const VALIDITY_THRESHOLD: f64 = 0.05;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `sqrt(pi/delta) [exp(-(D-w)^2/4delta) + exp(-(D+w)^2/4delta)]`, `D = e_j - e_k`.
///
/// The first term is the resonant Gaussian integral of the pulse envelope,
/// the second the counter-rotating one from the conjugate field.
pub fn spectral_factor(e_j: f64, e_k: f64, omega: f64, delta: f64) -> f64 {
    let d = e_j - e_k;
    let four_delta = 4.0 * delta;
    (PI / delta).sqrt() * ((-(d - omega).powi(2) / four_delta).exp() + (-(d + omega).powi(2) / four_delta).exp())
}

/// Post-pulse amplitudes `B = i G M` for every source/target pair.
#[derive(Debug, Clone)]
pub struct ExcitationState {
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    amplitudes: Vec<Complex64>,
    spectral: Vec<f64>,
    /// Largest total excited population of any source.
    pub validity: f64,
    pub threshold: f64,
    pub warning: Option<String>,
}

impl ExcitationState {
    /// State assembled from given amplitudes (row-major, source by target)
    /// and spectral factors.
    pub fn from_amplitudes(
        sources: Vec<usize>,
        targets: Vec<usize>,
        amplitudes: Vec<Complex64>,
        spectral: Vec<f64>,
    ) -> Result<Self> {
        let n = sources.len() * targets.len();
        if amplitudes.len() != n || spectral.len() != n {
            return Err(Error::Parameter {
                name: "amplitudes",
                reason: format!("expected {n} entries"),
            });
        }
        let nt = targets.len();
        let validity = (0..sources.len())
            .map(|s| amplitudes[s * nt..(s + 1) * nt].iter().map(|b| b.norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            sources,
            targets,
            amplitudes,
            spectral,
            validity,
            threshold: VALIDITY_THRESHOLD,
            warning: None,
        })
    }

    #[inline]
    pub fn amplitude(&self, s: usize, t: usize) -> Complex64 {
        self.amplitudes[s * self.targets.len() + t]
    }

    #[inline]
    pub fn population(&self, s: usize, t: usize) -> f64 {
        self.amplitude(s, t).norm_sqr()
    }

    /// `G` for the pair; `|G|^2` is the spectral weight entering the current.
    #[inline]
    pub fn spectral(&self, s: usize, t: usize) -> f64 {
        self.spectral[s * self.targets.len() + t]
    }

    pub fn source_population(&self, s: usize) -> f64 {
        (0..self.targets.len()).map(|t| self.population(s, t)).sum()
    }

    pub fn is_valid(&self) -> bool {
        self.validity <= self.threshold
    }

    /// `(source, target, population)` sorted by decreasing population.
    pub fn dominant(&self, count: usize) -> Vec<(usize, usize, f64)> {
        let nt = self.targets.len();
        let mut all: Vec<(usize, usize, f64)> = (0..self.amplitudes.len())
            .map(|i| (self.sources[i / nt], self.targets[i % nt], self.amplitudes[i].norm_sqr()))
            .collect();
        all.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        all.truncate(count);
        all
    }

    /// Text table `k j e_k e_j |M| G |B|^2`.
    pub fn write_table<W: Write>(&self, basis: &Basis, transitions: &TransitionSet, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# k j e_k e_j abs_m g pop")?;
        for s in 0..self.sources.len() {
            for t in 0..self.targets.len() {
                let (k, j) = (self.sources[s], self.targets[t]);
                writeln!(
                    out,
                    "{k} {j} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e}",
                    basis.orbitals[k].energy,
                    basis.orbitals[j].energy,
                    transitions.get(s, t).norm(),
                    self.spectral(s, t),
                    self.population(s, t)
                )?;
            }
        }
        Ok(())
    }
}

fn same_spatial_mode(a: &VortexPulse, b: &VortexPulse) -> bool {
    a.a0 == b.a0
        && a.charge == b.charge
        && a.radial_index == b.radial_index
        && a.waist == b.waist
        && a.axis == b.axis
        && a.normalization == b.normalization
}

pub fn excite(transitions: &TransitionSet, basis: &Basis, pulse: &VortexPulse) -> Result<ExcitationState> {
    excite_with_threshold(transitions, basis, pulse, VALIDITY_THRESHOLD)
}

/// `B_j = i G(e_j, e_k) M_jk`. Only the spatial mode of `pulse` must match the
/// one the matrix elements were computed with; carrier and envelope may differ.
pub fn excite_with_threshold(
    transitions: &TransitionSet,
    basis: &Basis,
    pulse: &VortexPulse,
    threshold: f64,
) -> Result<ExcitationState> {
    if !same_spatial_mode(&transitions.pulse, pulse) {
        return Err(Error::Parameter {
            name: "pulse",
            reason: "spatial mode differs from the one used for the matrix elements".into(),
        });
    }
    let (ns, nt) = (transitions.sources.len(), transitions.targets.len());
    let mut amplitudes = vec![ZERO; ns * nt];
    let mut spectral = vec![0.0; ns * nt];
    for s in 0..ns {
        let e_k = basis.orbitals[transitions.sources[s]].energy;
        for t in 0..nt {
            let e_j = basis.orbitals[transitions.targets[t]].energy;
            let g = spectral_factor(e_j, e_k, pulse.omega, pulse.delta);
            spectral[s * nt + t] = g;
            amplitudes[s * nt + t] = I * g * transitions.get(s, t);
        }
    }
    let validity = (0..ns)
        .map(|s| amplitudes[s * nt..(s + 1) * nt].iter().map(|b| b.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    let warning = (validity > threshold).then(|| {
        format!("perturbation theory breakdown: excited population {validity:.3e} exceeds {threshold:.3e}")
    });
    Ok(ExcitationState {
        sources: transitions.sources.clone(),
        targets: transitions.targets.clone(),
        amplitudes,
        spectral,
        validity,
        threshold,
        warning,
    })
}

/// Few-level system driven by the full real field, for checking the
/// first-order amplitudes.
#[derive(Debug, Clone)]
pub struct OracleSystem {
    pub states: Vec<usize>,
    energies: Vec<f64>,
    coupling: Vec<Complex64>,
    omega: f64,
    delta: f64,
}

/// Final coefficients of a propagation, indexed like `OracleSystem::states`.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub coefficients: Vec<Complex64>,
    pub norm_drift: f64,
    pub steps: usize,
}

/// Largest norm drift accepted by the oracle.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

impl OracleSystem {
    pub fn new(basis: &Basis, states: &[usize], pulse: &VortexPulse, grid: &QuadratureGrid) -> Self {
        Self {
            states: states.to_vec(),
            energies: states.iter().map(|&i| basis.orbitals[i].energy).collect(),
            coupling: interaction_matrix(basis, states, pulse, grid),
            omega: pulse.omega,
            delta: pulse.delta,
        }
    }

    /// Interaction-picture `-i H_I(t) c`.
    fn derivative(&self, t: f64, c: &[Complex64], out: &mut [Complex64], rotated: &mut [Complex64]) {
        let n = c.len();
        let env = (-self.delta * t * t).exp();
        let fwd = Complex64::from_polar(env, -self.omega * t);
        let bwd = fwd.conj();
        for (r, (&ci, &e)) in rotated.iter_mut().zip(c.iter().zip(&self.energies)) {
            *r = ci * Complex64::from_polar(1.0, -e * t);
        }
        for a in 0..n {
            let mut acc = ZERO;
            for b in 0..n {
                let h = self.coupling[a * n + b] * fwd + self.coupling[b * n + a].conj() * bwd;
                acc += h * rotated[b];
            }
            out[a] = -I * acc * Complex64::from_polar(1.0, self.energies[a] * t);
        }
    }

    /// Fixed-step RK4 from `t_span.0` to `t_span.1`, starting in `source`
    /// (an orbital index contained in `states`).
    pub fn propagate(&self, source: usize, dt: f64, t_span: (f64, f64)) -> Result<OracleResult> {
        let limit = 0.05 * 2.0 * PI / self.omega.abs();
        if !(dt > 0.0) || dt > limit {
            return Err(Error::Parameter {
                name: "dt",
                reason: format!("{dt} must lie in (0, {limit:.4}] to resolve the carrier"),
            });
        }
        let pos = self.states.iter().position(|&s| s == source).ok_or_else(|| Error::Parameter {
            name: "source",
            reason: format!("orbital {source} is not in the propagated set"),
        })?;
        let n = self.states.len();
        let mut c = vec![ZERO; n];
        c[pos] = Complex64::new(1.0, 0.0);
        let steps = ((t_span.1 - t_span.0) / dt).ceil().max(1.0) as usize;
        let h = (t_span.1 - t_span.0) / steps as f64;
        let mut k = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
        let mut tmp = vec![ZERO; n];
        let mut scratch = vec![ZERO; n];
        let mut drift: f64 = 0.0;
        for step in 0..steps {
            let t = t_span.0 + step as f64 * h;
            self.derivative(t, &c, &mut k[0], &mut scratch);
            for i in 0..n {
                tmp[i] = c[i] + 0.5 * h * k[0][i];
            }
            self.derivative(t + 0.5 * h, &tmp, &mut k[1], &mut scratch);
            for i in 0..n {
                tmp[i] = c[i] + 0.5 * h * k[1][i];
            }
            self.derivative(t + 0.5 * h, &tmp, &mut k[2], &mut scratch);
            for i in 0..n {
                tmp[i] = c[i] + h * k[2][i];
            }
            self.derivative(t + h, &tmp, &mut k[3], &mut scratch);
            for i in 0..n {
                c[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            drift = drift.max((norm - 1.0).abs());
            if drift > NORM_DRIFT_LIMIT {
                return Err(Error::StepSize {
                    drift,
                    limit: NORM_DRIFT_LIMIT,
                });
            }
        }
        Ok(OracleResult {
            coefficients: c,
            norm_drift: drift,
            steps,
        })
    }
}

/// Symmetric time window over which the envelope exceeds `exp(-40)`.
pub fn default_time_span(delta: f64) -> (f64, f64) {
    let t = (40.0 / delta).sqrt();
    (-t, t)
}

/// Propagates every source of `states` that is occupied in `basis` and
/// returns `(source, result)` pairs.
pub fn propagate_oracle(
    basis: &Basis,
    states: &[usize],
    pulse: &VortexPulse,
    grid: &QuadratureGrid,
    dt: f64,
    t_span: (f64, f64),
) -> Result<Vec<(usize, OracleResult)>> {
    let system = OracleSystem::new(basis, states, pulse, grid);
    states
        .iter()
        .filter(|&&i| basis.orbitals[i].occupied)
        .map(|&k| system.propagate(k, dt, t_span).map(|r| (k, r)))
        .collect()
}
