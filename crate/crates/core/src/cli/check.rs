//! Invariant suite run by the `check` subcommand.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::config::RunConfig;
use super::scan::Model;
use crate::beam::{mode_profile, rho_max, Normalization, VortexPulse};
use crate::coupling::{build_transition_set, TransitionSet, TransitionSpec};
use crate::dynamics::{default_time_span, excite, OracleSystem, NORM_DRIFT_LIMIT};
use crate::error::Result;
use crate::numerics::constants::FINE_STRUCTURE;
use crate::numerics::{build_grid, central_difference_gradient, GridSpec, PhysicalConstants};
use crate::observables::{
    b_field_center, divergence_diagnostic, magnetic_moment, sample_current, synthetic_ring, DIVERGENCE_TOLERANCE,
};
use crate::structure::{build_basis, Basis, ModelConfig, SymmetryTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn bound(name: &'static str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: if measured <= tolerance { Status::Pass } else { Status::Fail },
            measured,
            tolerance,
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skipped,
            measured: 0.0,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub config_hash: String,
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != Status::Fail)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for o in &self.outcomes {
            match o.status {
                Status::Skipped => writeln!(out, "SKIP  {:<28} {}", o.name, o.detail)?,
                s => writeln!(
                    out,
                    "{}  {:<28} measured {:.3e} tolerance {:.1e}  {}",
                    if s == Status::Pass { "PASS" } else { "FAIL" },
                    o.name,
                    o.measured,
                    o.tolerance,
                    o.detail
                )?,
            }
        }
        let failed = self.outcomes.iter().filter(|o| o.status == Status::Fail).count();
        writeln!(out, "config {}: {} checks, {failed} failed", self.config_hash, self.outcomes.len())
    }
}

/// Largest `|M|` violating the azimuthal rule `m_j - m_k = m +- 1` and the
/// parity rule `l_k + l_j + |m| + 1` even, relative to the largest allowed
/// `|M|`. When no allowed entry survives (every element cancels, as above
/// the cutoff charge) the largest integrand bound sets the scale instead.
/// Orbitals without a single magnetic number are skipped by the azimuthal
/// rule.
pub fn selection_violations(basis: &Basis, ts: &TransitionSet) -> (f64, f64) {
    const CANCELLED: f64 = 1e-10;
    let charge = ts.pulse.charge as i64;
    let mut forbidden = [0.0_f64; 2];
    let mut allowed = [0.0_f64; 2];
    let mut bound = 0.0_f64;
    for s in 0..ts.sources.len() {
        let ok = &basis.orbitals[ts.sources[s]];
        for t in 0..ts.targets.len() {
            let oj = &basis.orbitals[ts.targets[t]];
            let m = ts.raw(s, t).norm();
            bound = bound.max(ts.bound(s, t));
            let live = !ts.is_structural_zero(s, t, CANCELLED);
            let rules = [
                match (ok.magnetic_number(), oj.magnetic_number()) {
                    (Some(mk), Some(mj)) => Some(mj - mk == charge - 1 || mj - mk == charge + 1),
                    _ => None,
                },
                Some((ok.l + oj.l + charge.unsigned_abs() as usize + 1) % 2 == 0),
            ];
            for (r, rule) in rules.iter().enumerate() {
                match rule {
                    Some(true) if live => allowed[r] = allowed[r].max(m),
                    Some(false) => forbidden[r] = forbidden[r].max(m),
                    _ => {}
                }
            }
        }
    }
    let rel = |r: usize| {
        let scale = if allowed[r] > 0.0 { allowed[r] } else { bound };
        if scale > 0.0 {
            forbidden[r] / scale
        } else {
            0.0
        }
    };
    (rel(0), rel(1))
}

/// First-order populations against direct propagation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub max_population: f64,
    pub worst_relative: f64,
    pub compared: usize,
    pub norm_drift: f64,
}

/// Weak off-axis pulse on the basis truncated to `l <= 2` in bands 2 and 3,
/// tuned to one transition; populations above 1% of the largest are compared.
pub fn tdpt_oracle_comparison() -> Result<OracleComparison> {
    let basis = build_basis(&ModelConfig::c60())?.truncated(&[(2, 2), (3, 2)]);
    let grid = build_grid(GridSpec {
        r_min: 0.0,
        r_max: 40.0,
        radial_nodes: 96,
        angular_order: 16,
        basis_lmax: 2,
    })?;
    let k = basis.occupied(2)[1];
    let j = basis.unoccupied(3)[0];
    let omega = basis.orbitals[j].energy - basis.orbitals[k].energy;
    let pulse = VortexPulse::new(5e-4, 1, 0, 945.0, omega, 1.6e-5, [400.0, 0.0], Normalization::Peak)?;
    let ts = build_transition_set(&basis, &pulse, &grid, &TransitionSpec::default())?;
    let ex = excite(&ts, &basis, &pulse)?;
    let mut states = basis.band_orbitals(2);
    states.extend(basis.band_orbitals(3));
    let sys = OracleSystem::new(&basis, &states, &pulse, &grid);
    let run = sys.propagate(k, 0.01 * TAU / omega, default_time_span(pulse.delta))?;
    let s = ex.sources.iter().position(|&x| x == k).expect("source is occupied");
    let max = (0..ex.targets.len()).map(|t| ex.population(s, t)).fold(0.0, f64::max);
    let (mut worst, mut compared) = (0.0_f64, 0);
    for t in 0..ex.targets.len() {
        let tdpt = ex.population(s, t);
        if tdpt < 1e-2 * max {
            continue;
        }
        let pos = states.iter().position(|&x| x == ex.targets[t]).expect("target in oracle space");
        worst = worst.max((run.coefficients[pos].norm_sqr() / tdpt - 1.0).abs());
        compared += 1;
    }
    Ok(OracleComparison {
        max_population: max,
        worst_relative: worst,
        compared,
        norm_drift: run.norm_drift,
    })
}

/// Relative deviations of a synthetic loop from `m_z = I pi R^2` and
/// `B_z = mu0 I / (2R)`.
pub fn ring_oracle_errors() -> (f64, f64) {
    let (i, a) = (0.37, 6.7);
    let field = synthetic_ring(i, a, 0.01 * a, 64, 16);
    let m = magnetic_moment(&field)[2];
    let b = b_field_center(&field)[2];
    let exact_b = FINE_STRUCTURE * FINE_STRUCTURE * TAU * i / a;
    ((m / (i * PI * a * a) - 1.0).abs(), (b / exact_b - 1.0).abs())
}

fn gradient_check(basis: &Basis) -> CheckOutcome {
    let points = [[5.1, -1.3, 2.2], [-0.7, 6.4, -1.9], [2.0, 2.5, -6.0], [7.3, 0.4, 0.9]];
    let mut worst = 0.0_f64;
    for (i, _) in basis.orbitals.iter().enumerate().step_by(7) {
        for p in points {
            let exact = basis.evaluate_gradient(i, p).expect("off origin");
            let fd = central_difference_gradient(|q| basis.evaluate_orbital(i, q), p, 1e-4);
            let scale = exact.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-3);
            for c in 0..3 {
                worst = worst.max((exact[c] - fd[c]).norm() / scale);
            }
        }
    }
    CheckOutcome::bound("orbital gradients", worst, 1e-6, "analytic vs central difference")
}

fn orthonormality_check(model: &Model) -> Result<CheckOutcome> {
    let b = &model.basis;
    let mut idx = b.band_orbitals(model.transitions.source_band);
    idx.extend(b.band_orbitals(model.transitions.target_band));
    let grid = model.transition_grid(0)?;
    let lmax = idx.iter().map(|&i| b.orbitals[i].l).max().unwrap_or(0);
    let n = idx.len();
    let parts = grid.map_blocks(|range| {
        let mut s = vec![Complex64::new(0.0, 0.0); n * n];
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for p in range {
            let h = grid.harmonics(p, lmax);
            let w = grid.weight(p);
            for (a, &i) in idx.iter().enumerate() {
                v[a] = b.value_with(i, &h);
            }
            for a in 0..n {
                for c in 0..n {
                    s[a * n + c] += w * v[a].conj() * v[c];
                }
            }
        }
        s
    });
    let mut worst = 0.0_f64;
    for a in 0..n {
        for c in 0..n {
            let sum: Complex64 = parts.iter().map(|s| s[a * n + c]).sum();
            let target = if a == c { 1.0 } else { 0.0 };
            worst = worst.max((sum - target).norm());
        }
    }
    Ok(CheckOutcome::bound("orthonormality", worst, 1e-8, format!("{n} orbitals of the coupled bands")))
}

fn normalization_check(config: &RunConfig) -> Result<CheckOutcome> {
    let waist = PhysicalConstants::default().nm_to_bohr(config.pulse.waist_nm);
    let mut worst = 0.0_f64;
    for m in 1..=6 {
        let p = VortexPulse::new(1.0, m, 0, waist, 0.3, 1e-5, [0.0; 2], Normalization::Peak)?;
        let peak = mode_profile(&p, rho_max(m, waist)?).abs();
        worst = worst.max((peak - 1.0).abs());
    }
    Ok(CheckOutcome::bound("beam peak normalization", worst, 1e-10, "|A| at rho_max for m = 1..6"))
}

fn selection_check(model: &Model) -> Result<Vec<CheckOutcome>> {
    let (mut az, mut par) = (0.0_f64, 0.0_f64);
    for m in 0..=3 {
        let p = VortexPulse::new(1e-3, m, 0, 945.0, 0.3, 1.6e-5, [0.0; 2], Normalization::Peak)?;
        let ts = model.transition_set(&p)?;
        let (a, q) = selection_violations(&model.basis, &ts);
        az = az.max(a);
        par = par.max(q);
    }
    Ok(vec![
        CheckOutcome::bound("azimuthal selection", az, 1e-10, "centred beam, m = 0..3"),
        CheckOutcome::bound("parity selection", par, 1e-10, "centred beam, m = 0..3"),
    ])
}

fn response_checks(model: &Model) -> Result<Vec<CheckOutcome>> {
    let omega = model.dominant_resonance()?;
    let waist = PhysicalConstants::default().nm_to_bohr(model.config.pulse.waist_nm);
    let at = |m: i32, axis: [f64; 2]| -> Result<_> {
        let p = VortexPulse::new(1e-3, m, 0, waist, omega, 1.6e-5, axis, Normalization::Peak)?;
        let ts = model.transition_set(&p)?;
        model.excite(&ts, &p)
    };
    let reference = at(1, [rho_max(1, waist)?, 0.0])?;
    let grid = model.current_grid();
    let conv = model.config.numerics.convention;
    let scale = sample_current(&model.evaluator(&reference), grid, conv).max_abs();
    let null = sample_current(&model.evaluator(&at(0, [0.0; 2])?), grid, conv).max_abs();
    let eta = model.config.numerics.eta;
    let driven = at(2, [0.4 * waist, 0.1 * waist])?;
    let div = divergence_diagnostic(&model.evaluator(&driven), grid);
    Ok(vec![
        CheckOutcome::bound("null vortex current", null / scale, 1e-10, "m = 0 against m = 1 at rho_max"),
        CheckOutcome::bound(
            "degeneracy window",
            div,
            DIVERGENCE_TOLERANCE,
            format!("relative div j with eta = {eta:e}"),
        ),
    ])
}

fn symmetry_check(config: &RunConfig) -> CheckOutcome {
    match &config.model.symmetry_table {
        None => CheckOutcome::skipped("symmetry table", "no table configured"),
        Some(path) if !path.exists() => {
            CheckOutcome::skipped("symmetry table", format!("notice: {} not found, skipped", path.display()))
        }
        Some(path) => match SymmetryTable::from_path(path) {
            Ok(t) => CheckOutcome::bound(
                "symmetry table",
                0.0,
                0.0,
                format!("{} angular momenta loaded", t.angular_momenta().count()),
            ),
            Err(e) => CheckOutcome {
                name: "symmetry table",
                status: Status::Fail,
                measured: f64::NAN,
                tolerance: 0.0,
                detail: e.to_string(),
            },
        },
    }
}

/// Runs every check. Model-dependent checks use the configured bands and
/// numerics; the symmetry table is validated separately so a missing file
/// only skips its own check.
pub fn cmd_check(config: &RunConfig) -> Result<CheckReport> {
    let mut base = config.clone();
    base.model.symmetry_table = None;
    let model = Model::from_config(&base)?;
    let mut outcomes = vec![
        gradient_check(&model.basis),
        orthonormality_check(&model)?,
        normalization_check(config)?,
    ];
    outcomes.extend(selection_check(&model)?);
    let (m_err, b_err) = ring_oracle_errors();
    outcomes.push(CheckOutcome::bound("ring oracle moment", m_err, 1e-3, "m_z = I pi R^2"));
    outcomes.push(CheckOutcome::bound("ring oracle field", b_err, 1e-3, "B_z = mu0 I / (2R)"));
    outcomes.extend(response_checks(&model)?);
    let oracle = tdpt_oracle_comparison()?;
    outcomes.push(CheckOutcome::bound(
        "first order vs propagation",
        oracle.worst_relative,
        0.02,
        format!(
            "{} populations, max {:.2e}, norm drift {:.1e} (limit {NORM_DRIFT_LIMIT:.0e})",
            oracle.compared, oracle.max_population, oracle.norm_drift
        ),
    ));
    outcomes.push(symmetry_check(config));
    Ok(CheckReport {
        config_hash: config.hash(),
        outcomes,
    })
}
