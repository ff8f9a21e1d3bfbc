//! Scan orchestration and data export.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::VERSION;
use crate::beam::{a0_from_intensity, rho_max, Normalization, VortexPulse};
use crate::coupling::{build_transition_set, interaction_matrix, transition_grid_spec, TransitionSet, TransitionSpec};
use crate::dynamics::{excite_with_threshold, ExcitationState};
use crate::error::{Error, Result};
use crate::numerics::{build_grid, GridSpec, PhysicalConstants, QuadratureGrid};
use crate::observables::{
    cylindrical_decomposition, integrate_plane_magnitude, magnetics_with, ring_count, sample_current, sample_current_plane, CurrentEvaluator,
    CylindricalNorms, MagneticsResult, Plane, PlaneLattice,
};
use crate::structure::{build_basis, Basis, ModelConfig, SymmetryTable};

/// Gauss-Legendre order per lattice cell for the integrated `|j|`.
pub const PLANE_CELL_ORDER: usize = 3;

/// Largest transferable charge reported in the literature for the C60 model.
pub const REFERENCE_CUTOFF: i32 = 7;

/// Basis, grids and numerical settings shared by every point of a run.
#[derive(Debug, Clone)]
pub struct Model {
    pub basis: Basis,
    pub transitions: TransitionSpec,
    pub config: RunConfig,
    base_grid: GridSpec,
    current_grid: QuadratureGrid,
}

impl Model {
    pub fn from_config(config: &RunConfig) -> Result<Self> {
        let m = &config.model;
        let mut partial = BTreeMap::new();
        for (k, v) in &m.partial_shell_order {
            let band: u32 = k
                .parse()
                .map_err(|_| Error::Config(format!("model.partial_shell_order key `{k}` is not a band number")))?;
            partial.insert(band, v.clone());
        }
        let symmetry = match &m.symmetry_table {
            Some(path) => Some(SymmetryTable::from_path(path).map_err(|e| {
                Error::Config(format!("model.symmetry_table {}: {e}", path.display()))
            })?),
            None => None,
        };
        let basis = build_basis(&ModelConfig {
            bands: m.bands.clone(),
            cage_radius: m.cage_radius,
            partial_shell_order: partial,
            symmetry,
        })?;
        let n = &config.numerics;
        let band_lmax = |band: u32| {
            m.bands
                .iter()
                .find(|b| b.n == band)
                .map(|b| b.l_max)
                .ok_or_else(|| Error::Config(format!("model has no band {band}")))
        };
        let (ls, lt) = (band_lmax(m.source_band)?, band_lmax(m.target_band)?);
        let base_grid = GridSpec {
            r_min: 0.0,
            r_max: n.r_max,
            radial_nodes: n.radial_nodes,
            angular_order: n.angular_order,
            basis_lmax: ls.max(lt),
        };
        let current_grid = build_grid(GridSpec {
            r_min: n.r_cut,
            r_max: n.r_max,
            radial_nodes: n.current_radial_nodes,
            angular_order: n.current_angular_order.max(2 * lt + 2),
            basis_lmax: lt,
        })?;
        Ok(Self {
            basis,
            transitions: TransitionSpec {
                source_band: m.source_band,
                target_band: m.target_band,
                prune_threshold: n.prune_threshold,
            },
            config: config.clone(),
            base_grid,
            current_grid,
        })
    }

    fn band_lmax(&self, band: u32) -> usize {
        self.basis.bands.iter().find(|b| b.n == band).map_or(0, |b| b.l_max)
    }

    pub fn transition_grid(&self, charge: i32) -> Result<QuadratureGrid> {
        let ls = self.band_lmax(self.transitions.source_band);
        let lt = self.band_lmax(self.transitions.target_band);
        build_grid(transition_grid_spec(self.base_grid, ls, lt, charge))
    }

    pub fn current_grid(&self) -> &QuadratureGrid {
        &self.current_grid
    }

    pub fn transition_set(&self, pulse: &VortexPulse) -> Result<TransitionSet> {
        build_transition_set(&self.basis, pulse, &self.transition_grid(pulse.charge)?, &self.transitions)
    }

    /// True when some matrix element is not a cancellation zero.
    pub fn is_coupled(&self, ts: &TransitionSet) -> bool {
        let tol = self.config.numerics.structural_tolerance;
        (0..ts.sources.len()).any(|s| (0..ts.targets.len()).any(|t| !ts.is_structural_zero(s, t, tol)))
    }

    pub fn excite(&self, ts: &TransitionSet, pulse: &VortexPulse) -> Result<ExcitationState> {
        excite_with_threshold(ts, &self.basis, pulse, self.config.numerics.validity_threshold)
    }

    pub fn evaluator<'a>(&'a self, excitation: &ExcitationState) -> CurrentEvaluator<'a> {
        CurrentEvaluator::new(excitation, &self.basis, self.config.numerics.eta)
    }

    /// Magnetic response of one excitation.
    pub fn response(&self, excitation: &ExcitationState) -> (MagneticsResult, CylindricalNorms) {
        let field = sample_current(&self.evaluator(excitation), &self.current_grid, self.config.numerics.convention);
        (magnetics_with(&field, self.config.numerics.r_cut), cylindrical_decomposition(&field))
    }

    /// Photon energy (hartree) of the gap with the largest summed squared
    /// coupling to a uniform x-polarized field.
    pub fn dominant_resonance(&self) -> Result<f64> {
        let sources = self.basis.occupied(self.transitions.source_band);
        let targets = self.basis.unoccupied(self.transitions.target_band);
        if sources.is_empty() || targets.is_empty() {
            return Err(Error::Config("no transitions between the configured bands".into()));
        }
        // A centred Gaussian with a waist far beyond the cage is uniform on it.
        let uniform = VortexPulse::new(1.0, 0, 0, 1e4 * self.basis.cage_radius, 1.0, 1.0, [0.0; 2], Normalization::Peak)?;
        let mut idx = sources.clone();
        idx.extend(&targets);
        let m = interaction_matrix(&self.basis, &idx, &uniform, &self.transition_grid(0)?);
        let n = idx.len();
        let eta = self.config.numerics.eta;
        let mut lines: Vec<(f64, f64)> = Vec::new();
        for (a, &k) in sources.iter().enumerate() {
            for (b, &j) in targets.iter().enumerate() {
                let gap = self.basis.orbitals[j].energy - self.basis.orbitals[k].energy;
                let w = m[(sources.len() + b) * n + a].norm_sqr();
                match lines.iter_mut().find(|(g, _)| (g - gap).abs() < eta) {
                    Some(line) => line.1 += w,
                    None => lines.push((gap, w)),
                }
            }
        }
        lines.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = lines
            .iter()
            .fold((f64::NAN, -1.0), |acc, &(g, w)| if w > acc.1 * (1.0 + 1e-9) { (g, w) } else { acc });
        if !(best.0 > 0.0) {
            return Err(Error::Convergence("no positive transition energy with nonzero coupling".into()));
        }
        Ok(best.0)
    }
}

/// Beam axis placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Offset {
    Ratio(f64),
    Nm(f64),
}

/// A configuration with every axis expanded and units converted.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub model: Model,
    pub hash: String,
    /// Vector-potential amplitude, a.u.
    pub a0: f64,
    /// Photon energy used for the intensity conversion, hartree.
    pub reference_omega: f64,
    pub delta: f64,
    pub waist: f64,
    pub omegas: Vec<f64>,
    pub charges: Vec<i32>,
    pub offsets: Vec<Offset>,
    pub omega_is_resonance: bool,
}

impl RunPlan {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let model = Model::from_config(config)?;
        let units = PhysicalConstants::default();
        let p = &config.pulse;
        let (omegas, omega_is_resonance) = match &p.omega_ev {
            Some(s) => (s.values("omega_ev")?.iter().map(|&e| units.ev_to_hartree(e)).collect(), false),
            None => (vec![model.dominant_resonance()?], true),
        };
        let reference_omega = match (omegas.len(), p.reference_omega_ev) {
            (_, Some(e)) => units.ev_to_hartree(e),
            (1, None) => omegas[0],
            _ => model.dominant_resonance()?,
        };
        let a0 = match (config.intensity(), p.a0) {
            (_, Some(a)) => a,
            (Some(i), None) => a0_from_intensity(i, reference_omega),
            (None, None) => unreachable!("intensity defaults when a0 is absent"),
        };
        let offsets = match (&p.rho_ratio, &p.rho0_nm) {
            (Some(r), _) => r.values("rho_ratio")?.into_iter().map(Offset::Ratio).collect(),
            (None, Some(r)) => r.values("rho0_nm")?.into_iter().map(Offset::Nm).collect(),
            (None, None) => vec![Offset::Nm(0.0)],
        };
        Ok(Self {
            hash: config.hash(),
            a0,
            reference_omega,
            delta: config.delta(),
            waist: units.nm_to_bohr(p.waist_nm),
            omegas,
            charges: p.charge.values(),
            offsets,
            omega_is_resonance,
            model,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.model.config
    }

    /// Axis distance from the cage centre, bohr.
    pub fn axis_distance(&self, charge: i32, offset: Offset) -> Result<f64> {
        match offset {
            Offset::Ratio(r) => Ok(r * rho_max(charge, self.waist)?),
            Offset::Nm(d) => Ok(PhysicalConstants::default().nm_to_bohr(d)),
        }
    }

    pub fn pulse(&self, charge: i32, offset: Offset, omega: f64) -> Result<VortexPulse> {
        let p = &self.config().pulse;
        VortexPulse::new(
            self.a0,
            charge,
            p.radial_index,
            self.waist,
            omega,
            self.delta,
            [self.axis_distance(charge, offset)?, 0.0],
            p.normalization,
        )
    }

    /// Evaluates every (charge, offset, omega) combination. Matrix elements
    /// are computed once per (charge, offset).
    pub fn evaluate(&self) -> Result<Vec<Record>> {
        let modes: Vec<(i32, Offset)> = self
            .charges
            .iter()
            .flat_map(|&c| self.offsets.iter().map(move |&o| (c, o)))
            .collect();
        let per_mode: Vec<Result<Vec<Record>>> = modes
            .par_iter()
            .map(|&(charge, offset)| {
                let pulse = self.pulse(charge, offset, self.omegas[0])?;
                let ts = self.model.transition_set(&pulse)?;
                let coupled = self.model.is_coupled(&ts);
                self.omegas
                    .iter()
                    .map(|&w| self.record(&ts, &pulse.with_omega(w), offset, coupled))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for r in per_mode {
            out.extend(r?);
        }
        Ok(out)
    }

    fn record(&self, ts: &TransitionSet, pulse: &VortexPulse, offset: Offset, coupled: bool) -> Result<Record> {
        let units = PhysicalConstants::default();
        let ex = self.model.excite(ts, pulse)?;
        let (mag, norms) = self.model.response(&ex);
        let b = &self.model.basis;
        let dominant = ex
            .dominant(self.config().numerics.dominant_count)
            .into_iter()
            .filter(|d| d.2 > 0.0)
            .map(|(k, j, p)| Transition {
                from: k,
                to: j,
                from_label: b.orbitals[k].label(),
                to_label: b.orbitals[j].label(),
                population: p,
            })
            .collect();
        let rho0 = pulse.offset();
        Ok(Record {
            charge: pulse.charge,
            omega_ev: units.hartree_to_ev(pulse.omega),
            rho_ratio: match offset {
                Offset::Ratio(r) => Some(r),
                Offset::Nm(_) if pulse.charge != 0 => Some(rho0 / rho_max(pulse.charge, self.waist)?),
                Offset::Nm(_) => None,
            },
            rho0_nm: units.bohr_to_nm(rho0),
            mz_au: mag.moment[2],
            mz_mub: mag.moment_bohr_magnetons[2],
            b_center_ut: mag.b_center_tesla[2] * 1e6,
            transverse_moment_au: mag.moment_transverse(),
            validity: ex.validity,
            coupled,
            norms,
            dominant,
            warnings: ex.warning.into_iter().chain(mag.warnings).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub from_label: String,
    pub to_label: String,
    pub population: f64,
}

/// Observables at one scan point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub charge: i32,
    pub omega_ev: f64,
    pub rho_ratio: Option<f64>,
    pub rho0_nm: f64,
    pub mz_au: f64,
    pub mz_mub: f64,
    pub b_center_ut: f64,
    pub transverse_moment_au: f64,
    pub validity: f64,
    /// False when every matrix element is a cancellation zero.
    pub coupled: bool,
    pub norms: CylindricalNorms,
    pub dominant: Vec<Transition>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: &'static str,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub command: &'static str,
    pub axes: Vec<Axis>,
    pub records: Vec<Record>,
    pub config_hash: String,
    pub version: &'static str,
    /// `key value` lines for the report.
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

const CSV_HEADER: &str = "omega_eV,rho_ratio,mz_au,mz_muB,B_center_uT,validity,charge,rho0_nm,\
m_transverse_au,j_rho,j_phi,j_z,coupled,dominant,config_hash,version";

fn num(x: f64) -> String {
    // Adding zero folds -0 into 0.
    format!("{:.9e}", x + 0.0)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

impl ScanResult {
    fn new(plan: &RunPlan, command: &'static str, axes: Vec<Axis>, records: Vec<Record>) -> Self {
        let units = PhysicalConstants::default();
        let mut metadata = vec![
            ("command".to_string(), command.to_string()),
            ("config_hash".into(), plan.hash.clone()),
            ("version".into(), VERSION.into()),
            ("a0_au".into(), num(plan.a0)),
            ("reference_omega_eV".into(), num(units.hartree_to_ev(plan.reference_omega))),
            ("delta_au".into(), num(plan.delta)),
            ("fwhm_fs".into(), num(crate::beam::envelope_fwhm(plan.delta))),
            ("waist_bohr".into(), num(plan.waist)),
        ];
        if let Some(i) = plan.config().intensity() {
            metadata.push(("intensity_W_cm2".into(), num(i)));
        }
        if plan.omega_is_resonance {
            metadata.push(("omega_source".into(), "dominant resonance of the model".into()));
        }
        let mut warnings: Vec<String> = Vec::new();
        let breakdown: Vec<&Record> = records.iter().filter(|r| r.validity > plan.config().numerics.validity_threshold).collect();
        if !breakdown.is_empty() {
            let worst = breakdown.iter().map(|r| r.validity).fold(0.0, f64::max);
            warnings.push(format!(
                "first-order validity exceeded at {} of {} points (largest excited population {worst:.3e})",
                breakdown.len(),
                records.len()
            ));
        }
        for r in &records {
            for w in &r.warnings {
                if !w.starts_with("perturbation theory") && !warnings.contains(w) {
                    warnings.push(w.clone());
                }
            }
        }
        Self {
            command,
            axes,
            records,
            config_hash: plan.hash.clone(),
            version: VERSION,
            metadata,
            warnings,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            let dominant: Vec<String> = r
                .dominant
                .iter()
                .map(|t| format!("{}>{}:{:.3e}", t.from_label, t.to_label, t.population))
                .collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                num(r.omega_ev),
                opt(r.rho_ratio),
                num(r.mz_au),
                num(r.mz_mub),
                num(r.b_center_ut),
                num(r.validity),
                r.charge,
                num(r.rho0_nm),
                num(r.transverse_moment_au),
                num(r.norms.rho),
                num(r.norms.phi),
                num(r.norms.z),
                u8::from(r.coupled),
                dominant.join("|"),
                self.config_hash,
                self.version
            )?;
        }
        Ok(())
    }

    /// One observable per row.
    pub fn write_long<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "point,charge,omega_eV,rho_ratio,observable,value,config_hash,version")?;
        for (i, r) in self.records.iter().enumerate() {
            for (name, v) in [
                ("mz_au", r.mz_au),
                ("mz_muB", r.mz_mub),
                ("B_center_uT", r.b_center_ut),
                ("validity", r.validity),
                ("j_rho", r.norms.rho),
                ("j_phi", r.norms.phi),
                ("j_z", r.norms.z),
            ] {
                writeln!(
                    out,
                    "{i},{},{},{},{name},{},{},{}",
                    r.charge,
                    num(r.omega_ev),
                    opt(r.rho_ratio),
                    num(v),
                    self.config_hash,
                    self.version
                )?;
            }
        }
        Ok(())
    }

    pub fn write_report<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "{k} {v}")?;
        }
        for a in &self.axes {
            writeln!(out, "axis {} {} points", a.name, a.values.len())?;
        }
        writeln!(out, "records {}", self.records.len())?;
        for w in &self.warnings {
            writeln!(out, "warning {w}")?;
        }
        Ok(())
    }

    /// Writes `<stem>.csv`, `<stem>_long.csv` (if enabled) and
    /// `<stem>_report.txt` under the configured directory.
    pub fn write_files(&self, config: &RunConfig) -> Result<Vec<PathBuf>> {
        let (dir, stem) = output_target(config, self.command)?;
        let mut files = vec![dir.join(format!("{stem}.csv"))];
        self.write_csv(fs::File::create(&files[0])?)?;
        if config.output.long_format {
            files.push(dir.join(format!("{stem}_long.csv")));
            self.write_long(fs::File::create(&files[1])?)?;
        }
        let report = dir.join(format!("{stem}_report.txt"));
        self.write_report(fs::File::create(&report)?)?;
        files.push(report);
        Ok(files)
    }
}

fn output_target(config: &RunConfig, command: &str) -> Result<(PathBuf, String)> {
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let stem = config.output.stem.clone().unwrap_or_else(|| command.replace('-', "_"));
    Ok((dir, stem))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.to_string()))
    }
}

fn omega_axis(plan: &RunPlan) -> Axis {
    let units = PhysicalConstants::default();
    Axis {
        name: "omega_eV",
        values: plan.omegas.iter().map(|&w| units.hartree_to_ev(w)).collect(),
    }
}

/// Photon-energy scan at fixed charge and offset.
pub fn cmd_spectrum(config: &RunConfig) -> Result<ScanResult> {
    let config = &config.with_default_omega_range();
    let p = &config.pulse;
    require(
        p.omega_ev.as_ref().is_some_and(|s| s.is_scan()),
        "spectrum needs an omega_ev range or list",
    )?;
    require(
        config.scan_axes() == ["omega_ev"],
        "spectrum scans photon energy only; charge and offset must be single values",
    )?;
    let plan = RunPlan::new(config)?;
    let records = plan.evaluate()?;
    Ok(ScanResult::new(&plan, "spectrum", vec![omega_axis(&plan)], records))
}

/// Photon energy by offset-ratio map at fixed charge. Records are ordered
/// with photon energy outermost.
pub fn cmd_heatmap(config: &RunConfig) -> Result<ScanResult> {
    let config = &config.with_default_omega_range();
    let p = &config.pulse;
    require(
        p.omega_ev.as_ref().is_some_and(|s| s.is_scan()),
        "heatmap needs an omega_ev range or list",
    )?;
    require(
        p.rho_ratio.as_ref().is_some_and(|s| s.is_scan()),
        "heatmap needs a rho_ratio range or list",
    )?;
    require(!p.charge.is_scan(), "heatmap takes a single charge")?;
    let plan = RunPlan::new(config)?;
    let by_offset = plan.evaluate()?;
    let (no, nw) = (plan.offsets.len(), plan.omegas.len());
    let records = (0..nw)
        .flat_map(|w| (0..no).map(move |o| (o, w)))
        .map(|(o, w)| by_offset[o * nw + w].clone())
        .collect();
    let ratios = plan
        .offsets
        .iter()
        .map(|o| match o {
            Offset::Ratio(r) => *r,
            Offset::Nm(d) => *d,
        })
        .collect();
    Ok(ScanResult::new(
        &plan,
        "heatmap",
        vec![
            omega_axis(&plan),
            Axis {
                name: "rho_ratio",
                values: ratios,
            },
        ],
        records,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeSweep {
    pub scan: ScanResult,
    /// Largest charge with a non-vanishing coupling, when the beam is centred.
    pub cutoff: Option<i32>,
    /// Charge with the largest `|B_center|`.
    pub argmax: Option<i32>,
    /// `|B(20) - B(14)| / |B(14)|` when both charges are in the sweep.
    pub flatness: Option<f64>,
}

pub fn cmd_charge_sweep(config: &RunConfig) -> Result<ChargeSweep> {
    let p = &config.pulse;
    require(p.charge.is_scan(), "charge-sweep needs a list of charges")?;
    require(
        config.scan_axes() == ["charge"],
        "charge-sweep scans charge only; photon energy and offset must be single values",
    )?;
    let plan = RunPlan::new(config)?;
    let records = plan.evaluate()?;
    let centred = plan.offsets.iter().all(|&o| matches!(o, Offset::Nm(d) if d == 0.0));
    let cutoff = if centred {
        records.iter().filter(|r| r.coupled && r.charge >= 0).map(|r| r.charge).max()
    } else {
        None
    };
    let argmax = records
        .iter()
        .filter(|r| r.b_center_ut != 0.0)
        .fold(None::<&Record>, |best, r| match best {
            Some(b) if b.b_center_ut.abs() >= r.b_center_ut.abs() => Some(b),
            _ => Some(r),
        })
        .map(|r| r.charge);
    let at = |m: i32| records.iter().find(|r| r.charge == m).map(|r| r.b_center_ut);
    let flatness = match (at(14), at(20)) {
        (Some(b14), Some(b20)) if b14 != 0.0 => Some((b20 - b14).abs() / b14.abs()),
        _ => None,
    };
    let axes = vec![Axis {
        name: "charge",
        values: plan.charges.iter().map(|&c| c as f64).collect(),
    }];
    let mut scan = ScanResult::new(&plan, "charge-sweep", axes, records);
    if let Some(c) = cutoff {
        scan.metadata.push(("cutoff_charge".into(), c.to_string()));
        scan.metadata.push(("reference_cutoff_charge".into(), REFERENCE_CUTOFF.to_string()));
        if c == *plan.charges.iter().max().expect("nonempty") {
            scan.warnings.push("response does not vanish within the swept charges".into());
        }
    }
    if let Some(a) = argmax {
        scan.metadata.push(("argmax_charge".into(), a.to_string()));
    }
    if let Some(f) = flatness {
        scan.metadata.push(("flatness_20_vs_14".into(), num(f)));
    }
    Ok(ChargeSweep {
        scan,
        cutoff,
        argmax,
        flatness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaneReport {
    pub config_hash: String,
    pub omega_ev: f64,
    pub charge: i32,
    pub rho0_nm: f64,
    pub ring_count: usize,
    /// Integrated `|j|` over the xy plane at resolutions 32 and 64.
    pub refinement: (f64, f64),
    /// Cell-midpoint sum of `|j| dA` on the written xy lattice.
    pub lattice_integral: f64,
    pub refinement_change: f64,
    pub empty: bool,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub lattices: Vec<PlaneLattice>,
}

/// xy and xz current maps for one pulse, written to `<stem>_xy.dat` and
/// `<stem>_xz.dat` when `write` is set.
pub fn cmd_planes(config: &RunConfig, write: bool) -> Result<PlaneReport> {
    require(config.scan_axes().is_empty(), "planes takes single values on every axis")?;
    let plan = RunPlan::new(config)?;
    let (charge, offset, omega) = (plan.charges[0], plan.offsets[0], plan.omegas[0]);
    let pulse = plan.pulse(charge, offset, omega)?;
    let ts = plan.model.transition_set(&pulse)?;
    let ex = plan.model.excite(&ts, &pulse)?;
    let ev = plan.model.evaluator(&ex);
    let units = PhysicalConstants::default();
    let extent = units.nm_to_bohr(config.output.plane_extent_nm);
    let res = config.output.plane_resolution;
    let xy = sample_current_plane(&ev, Plane::Xy, extent, res)?;
    let xz = sample_current_plane(&ev, Plane::Xz, extent, res)?;
    let coarse = integrate_plane_magnitude(&ev, Plane::Xy, extent, 32, PLANE_CELL_ORDER)?;
    let fine = integrate_plane_magnitude(&ev, Plane::Xy, extent, 64, PLANE_CELL_ORDER)?;
    let refinement_change = if fine > 0.0 { (coarse - fine).abs() / fine } else { 0.0 };
    let empty = xy.is_zero() && xz.is_zero();
    let mut warnings: Vec<String> = ex.warning.iter().cloned().collect();
    if empty {
        warnings.push(format!("charge {charge} drives no current; lattices are all zero"));
    }
    let mut files = Vec::new();
    if write {
        let (dir, stem) = output_target(config, "planes")?;
        for lat in [&xy, &xz] {
            let path = dir.join(format!("{stem}_{}.dat", lat.plane.label()));
            let mut f = fs::File::create(&path)?;
            writeln!(f, "# config_hash={} version={VERSION}", plan.hash)?;
            lat.write(&mut f)?;
            files.push(path);
        }
    }
    Ok(PlaneReport {
        config_hash: plan.hash.clone(),
        omega_ev: units.hartree_to_ev(omega),
        charge,
        rho0_nm: units.bohr_to_nm(pulse.offset()),
        ring_count: ring_count(&xy)?,
        refinement: (coarse, fine),
        lattice_integral: xy.integrated_magnitude(),
        refinement_change,
        empty,
        files,
        warnings,
        lattices: vec![xy, xz],
    })
}

/// Writes `text` next to the other outputs of `command`.
pub fn write_text(config: &RunConfig, command: &str, suffix: &str, text: &str) -> Result<PathBuf> {
    let (dir, stem) = output_target(config, command)?;
    let path = dir.join(format!("{stem}_{suffix}"));
    fs::write(&path, text)?;
    Ok(path)
}
