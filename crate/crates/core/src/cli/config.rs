//! TOML run configuration.
//!
//! Lengths in the `model` block are in bohr and energies in hartree, matching
//! [`BandSpec`]. The `pulse` block uses laboratory units (eV, nm, fs, W/cm²).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::beam::Normalization;
use crate::error::{Error, Result};
use crate::observables::{CurrentConvention, DEGENERACY_TOLERANCE, R_CUT};
use crate::structure::BandSpec;

pub const DEFAULT_INTENSITY_W_CM2: f64 = 3e13;
pub const DEFAULT_FWHM_FS: f64 = 10.0;
pub const DEFAULT_WAIST_NM: f64 = 50.0;
pub const DEFAULT_OMEGA_RANGE_EV: (f64, f64, f64) = (5.0, 18.0, 0.1);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub pulse: PulseBlock,
    pub numerics: NumericsBlock,
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub cage_radius: f64,
    pub source_band: u32,
    pub target_band: u32,
    /// Optional file of symmetry-adapted coefficients.
    pub symmetry_table: Option<PathBuf>,
    /// Fill order of `m` in a partially occupied shell, keyed by band number.
    pub partial_shell_order: BTreeMap<String, Vec<i64>>,
    pub bands: Vec<BandSpec>,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            cage_radius: 6.7,
            source_band: 2,
            target_band: 3,
            symmetry_table: None,
            partial_shell_order: BTreeMap::new(),
            bands: BandSpec::c60_defaults(),
        }
    }
}

/// A fixed value, an explicit list, or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Value(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Sweep {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let v = match self {
            Sweep::Value(x) => vec![*x],
            Sweep::List(v) => v.clone(),
            Sweep::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(Error::Config(format!(
                        "empty {name} range: start {start}, stop {stop}, step {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(Error::Config(format!("empty {name} list")));
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("{name} value {x} is not finite")));
        }
        Ok(v)
    }

    pub fn is_scan(&self) -> bool {
        !matches!(self, Sweep::Value(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChargeAxis {
    One(i32),
    List(Vec<i32>),
}

impl ChargeAxis {
    pub fn values(&self) -> Vec<i32> {
        match self {
            ChargeAxis::One(m) => vec![*m],
            ChargeAxis::List(v) => v.clone(),
        }
    }

    pub fn is_scan(&self) -> bool {
        matches!(self, ChargeAxis::List(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseBlock {
    pub intensity_w_cm2: Option<f64>,
    /// Vector-potential amplitude, a.u.
    pub a0: Option<f64>,
    /// Photon energy. Absent means the strongest resonance of the model.
    pub omega_ev: Option<Sweep>,
    /// Photon energy at which intensity is converted to `A0` during scans.
    pub reference_omega_ev: Option<f64>,
    pub charge: ChargeAxis,
    pub radial_index: u32,
    pub waist_nm: f64,
    pub fwhm_fs: Option<f64>,
    /// Envelope parameter, a.u.
    pub delta: Option<f64>,
    pub rho0_nm: Option<Sweep>,
    pub rho_ratio: Option<Sweep>,
    pub normalization: Normalization,
}

impl Default for PulseBlock {
    fn default() -> Self {
        Self {
            intensity_w_cm2: None,
            a0: None,
            omega_ev: None,
            reference_omega_ev: None,
            charge: ChargeAxis::One(1),
            radial_index: 0,
            waist_nm: DEFAULT_WAIST_NM,
            fwhm_fs: None,
            delta: None,
            rho0_nm: None,
            rho_ratio: None,
            normalization: Normalization::Peak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsBlock {
    pub r_max: f64,
    pub radial_nodes: usize,
    pub angular_order: usize,
    pub current_radial_nodes: usize,
    pub current_angular_order: usize,
    pub eta: f64,
    pub r_cut: f64,
    pub prune_threshold: f64,
    pub validity_threshold: f64,
    pub structural_tolerance: f64,
    pub convention: CurrentConvention,
    pub dominant_count: usize,
}

impl Default for NumericsBlock {
    fn default() -> Self {
        Self {
            r_max: 40.0,
            // below ~150 nodes the narrow band-2 shell is under-resolved
            radial_nodes: 160,
            angular_order: 16,
            current_radial_nodes: 96,
            current_angular_order: 24,
            eta: DEGENERACY_TOLERANCE,
            r_cut: R_CUT,
            prune_threshold: crate::coupling::PRUNE_THRESHOLD,
            validity_threshold: crate::dynamics::VALIDITY_THRESHOLD,
            structural_tolerance: 1e-10,
            convention: CurrentConvention::Charge,
            dominant_count: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    /// File-name stem; defaults to the subcommand name.
    pub stem: Option<String>,
    /// Also write one-observable-per-row CSV.
    pub long_format: bool,
    /// Half-width of the plane lattices, nm.
    pub plane_extent_nm: f64,
    pub plane_resolution: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stem: None,
            long_format: true,
            plane_extent_nm: 1.2,
            plane_resolution: 64,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, applies `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings) and validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        // typed parse first: its errors carry line and column
        toml::from_str::<RunConfig>(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pulse;
        if p.intensity_w_cm2.is_some() && p.a0.is_some() {
            return Err(Error::Config("pulse: give only one of intensity_w_cm2 and a0".into()));
        }
        if p.fwhm_fs.is_some() && p.delta.is_some() {
            return Err(Error::Config("pulse: give only one of fwhm_fs and delta".into()));
        }
        if p.rho0_nm.is_some() && p.rho_ratio.is_some() {
            return Err(Error::Config("pulse: give only one of rho0_nm and rho_ratio".into()));
        }
        for (name, v) in [
            ("intensity_w_cm2", p.intensity_w_cm2),
            ("a0", p.a0),
            ("fwhm_fs", p.fwhm_fs),
            ("delta", p.delta),
            ("reference_omega_ev", p.reference_omega_ev),
        ] {
            if let Some(x) = v {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(Error::Config(format!("pulse.{name} must be positive, got {x}")));
                }
            }
        }
        if !(p.waist_nm > 0.0) {
            return Err(Error::Config(format!("pulse.waist_nm must be positive, got {}", p.waist_nm)));
        }
        if let Some(w) = &p.omega_ev {
            if w.values("omega_ev")?.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::Config("pulse.omega_ev values must be positive".into()));
            }
        }
        let charges = p.charge.values();
        if charges.is_empty() {
            return Err(Error::Config("pulse.charge list is empty".into()));
        }
        if let Some(r) = &p.rho_ratio {
            let ratios = r.values("rho_ratio")?;
            if ratios.iter().any(|&x| x < 0.0) {
                return Err(Error::Config("pulse.rho_ratio must be non-negative".into()));
            }
            if charges.contains(&0) {
                return Err(Error::Config(
                    "pulse.rho_ratio needs a nonzero charge (rho_max is undefined for m = 0); use rho0_nm".into(),
                ));
            }
        }
        if let Some(r) = &p.rho0_nm {
            if r.values("rho0_nm")?.iter().any(|&x| x < 0.0) {
                return Err(Error::Config("pulse.rho0_nm must be non-negative".into()));
            }
        }
        let axes = self.scan_axes();
        if axes.len() > 2 {
            return Err(Error::Config(format!("at most two scan axes per run, found {}", axes.join(", "))));
        }
        let n = &self.numerics;
        if !(n.eta > 0.0) {
            return Err(Error::Config(format!("numerics.eta must be positive, got {}", n.eta)));
        }
        if !(n.r_cut > 0.0) || !(n.r_max > n.r_cut) {
            return Err(Error::Config(format!(
                "numerics: need 0 < r_cut < r_max, got r_cut {} r_max {}",
                n.r_cut, n.r_max
            )));
        }
        if n.radial_nodes < 8 || n.current_radial_nodes < 8 {
            return Err(Error::Config("numerics: at least 8 radial nodes".into()));
        }
        if self.output.plane_resolution < 32 {
            return Err(Error::Config(format!(
                "output.plane_resolution must be at least 32, got {}",
                self.output.plane_resolution
            )));
        }
        if !(self.output.plane_extent_nm > 0.0) {
            return Err(Error::Config("output.plane_extent_nm must be positive".into()));
        }
        Ok(())
    }

    /// Names of the axes declared as scans.
    pub fn scan_axes(&self) -> Vec<&'static str> {
        let p = &self.pulse;
        let mut axes = Vec::new();
        if p.omega_ev.as_ref().is_some_and(Sweep::is_scan) {
            axes.push("omega_ev");
        }
        if p.charge.is_scan() {
            axes.push("charge");
        }
        if p.rho_ratio.as_ref().is_some_and(Sweep::is_scan) {
            axes.push("rho_ratio");
        }
        if p.rho0_nm.as_ref().is_some_and(Sweep::is_scan) {
            axes.push("rho0_nm");
        }
        axes
    }

    /// Copy with the default photon-energy range filled in when none is set.
    pub fn with_default_omega_range(&self) -> Self {
        let mut c = self.clone();
        if c.pulse.omega_ev.is_none() {
            let (start, stop, step) = DEFAULT_OMEGA_RANGE_EV;
            c.pulse.omega_ev = Some(Sweep::Range { start, stop, step });
        }
        c
    }

    pub fn intensity(&self) -> Option<f64> {
        match (self.pulse.intensity_w_cm2, self.pulse.a0) {
            (Some(i), _) => Some(i),
            (None, None) => Some(DEFAULT_INTENSITY_W_CM2),
            (None, Some(_)) => None,
        }
    }

    pub fn delta(&self) -> f64 {
        match (self.pulse.delta, self.pulse.fwhm_fs) {
            (Some(d), _) => d,
            (None, f) => crate::beam::delta_from_fwhm(f.unwrap_or(DEFAULT_FWHM_FS)),
        }
    }

    /// Canonical TOML of the configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Sets `a.b.c = value` in a TOML table, creating intermediate tables.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let parsed = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{assignment}`: `{part}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.intensity(), Some(DEFAULT_INTENSITY_W_CM2));
        assert!((crate::beam::envelope_fwhm(c.delta()) - DEFAULT_FWHM_FS).abs() < 1e-9);
    }

    #[test]
    fn both_amplitudes_rejected() {
        let e = RunConfig::from_toml("[pulse]\nintensity_w_cm2 = 1e13\na0 = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("only one of intensity_w_cm2 and a0"));
        assert!(RunConfig::from_toml("[pulse]\nfwhm_fs = 10\ndelta = 1e-5\n").is_err());
    }

    #[test]
    fn ratio_requires_nonzero_charge() {
        assert!(RunConfig::from_toml("[pulse]\ncharge = 0\nrho_ratio = 0.5\n").is_err());
        assert!(RunConfig::from_toml("[pulse]\ncharge = 0\nrho0_nm = 0.0\n").is_ok());
    }

    #[test]
    fn three_axes_rejected() {
        let text = "[pulse]\ncharge = [1, 2]\nomega_ev = { start = 5.0, stop = 6.0, step = 0.5 }\nrho_ratio = [0.2, 0.4]\n";
        let e = RunConfig::from_toml(text).unwrap_err();
        assert!(e.to_string().contains("at most two scan axes"));
    }

    #[test]
    fn empty_range_rejected() {
        let e = RunConfig::from_toml("[pulse]\nomega_ev = { start = 6.0, stop = 5.0, step = 0.5 }\n").unwrap_err();
        assert!(e.to_string().contains("empty omega_ev range"), "{e}");
    }

    #[test]
    fn range_expansion_is_inclusive() {
        let s = Sweep::Range {
            start: 5.0,
            stop: 18.0,
            step: 0.1,
        };
        let v = s.values("omega").unwrap();
        assert_eq!(v.len(), 131);
        assert!((v[130] - 18.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = RunConfig::from_toml("[pulse]\n\nwaist = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn overrides_set_nested_values() {
        let c = RunConfig::from_toml_with_overrides(
            "",
            &["pulse.charge=[1,2,3]".into(), "output.dir=results".into(), "numerics.eta=1e-5".into()],
        )
        .unwrap();
        assert_eq!(c.pulse.charge, ChargeAxis::List(vec![1, 2, 3]));
        assert_eq!(c.output.dir, PathBuf::from("results"));
        assert_eq!(c.numerics.eta, 1e-5);
        assert!(RunConfig::from_toml_with_overrides("", &["novalue".into()]).is_err());
        assert!(RunConfig::from_toml_with_overrides("", &["pulse.waist_nm.x=1".into()]).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        b.pulse.waist_nm = 60.0;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn canonical_round_trips() {
        let mut c = RunConfig::default();
        c.pulse.omega_ev = Some(Sweep::Range {
            start: 5.0,
            stop: 6.0,
            step: 0.25,
        });
        c.pulse.charge = ChargeAxis::List(vec![1, 2]);
        let back = RunConfig::from_toml(&c.canonical()).unwrap();
        assert_eq!(back, c);
    }
}
