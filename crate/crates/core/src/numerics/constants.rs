//! Physical constants and unit conversions.
//!
//! Values are CODATA 2018 (NIST SP 961, 2019). All physics code works in
//! Hartree atomic units; these conversions are applied only when reading
//! configuration or writing results.

use std::f64::consts::PI;

pub const HARTREE_IN_EV: f64 = 27.211_386_245_988;
pub const BOHR_IN_NM: f64 = 0.052_917_721_090_3;
pub const ATOMIC_TIME_IN_FS: f64 = 0.024_188_843_265_857;
pub const ATOMIC_CURRENT_IN_A: f64 = 6.623_618_237_510e-3;
pub const ATOMIC_BFIELD_IN_T: f64 = 2.350_517_567_58e5;
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
/// Atomic unit of magnetic moment (e hbar / m_e) is two Bohr magnetons.
pub const BOHR_MAGNETON_AU: f64 = 0.5;
/// E_h / (t_au a0^2) expressed in W/cm^2.
pub const ATOMIC_INTENSITY_IN_W_PER_CM2: f64 = 6.436_409_9e15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hartree_in_ev: f64,
    pub bohr_in_nm: f64,
    pub atomic_time_in_fs: f64,
    pub atomic_current_in_a: f64,
    pub atomic_bfield_in_t: f64,
    pub bohr_magneton_in_atomic_units: f64,
    /// When set, magnetostatics use mu0/4pi = alpha^2 (SI-based Hartree
    /// units); when cleared, the Gaussian-style mu0/4pi = 1 is used and
    /// fields are reported in units of alpha^2 B_au.
    pub si_vacuum_permeability: bool,
}

impl PhysicalConstants {
    pub const CODATA_2018: Self = Self {
        hartree_in_ev: HARTREE_IN_EV,
        bohr_in_nm: BOHR_IN_NM,
        atomic_time_in_fs: ATOMIC_TIME_IN_FS,
        atomic_current_in_a: ATOMIC_CURRENT_IN_A,
        atomic_bfield_in_t: ATOMIC_BFIELD_IN_T,
        bohr_magneton_in_atomic_units: BOHR_MAGNETON_AU,
        si_vacuum_permeability: true,
    };

    /// mu0 / 4pi in atomic units.
    pub fn mu0_over_4pi(&self) -> f64 {
        if self.si_vacuum_permeability {
            FINE_STRUCTURE * FINE_STRUCTURE
        } else {
            1.0
        }
    }

    pub fn ev_to_hartree(&self, ev: f64) -> f64 {
        ev / self.hartree_in_ev
    }

    pub fn hartree_to_ev(&self, hartree: f64) -> f64 {
        hartree * self.hartree_in_ev
    }

    pub fn nm_to_bohr(&self, nm: f64) -> f64 {
        nm / self.bohr_in_nm
    }

    pub fn bohr_to_nm(&self, bohr: f64) -> f64 {
        bohr * self.bohr_in_nm
    }

    pub fn au_time_to_fs(&self, t: f64) -> f64 {
        t * self.atomic_time_in_fs
    }

    pub fn fs_to_au_time(&self, fs: f64) -> f64 {
        fs / self.atomic_time_in_fs
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Cycle-averaged intensity (W/cm^2) of a linearly polarized field with
/// peak electric amplitude `e0` (a.u.): I = (1/2) eps0 c E0^2.
pub fn intensity_from_field(e0: f64) -> f64 {
    // eps0 = 1/(4 pi), c = 1/alpha in atomic units
    0.5 / (4.0 * PI) / FINE_STRUCTURE * e0 * e0 * ATOMIC_INTENSITY_IN_W_PER_CM2
}

pub fn field_from_intensity(intensity_w_cm2: f64) -> f64 {
    (intensity_w_cm2 / intensity_from_field(1.0)).sqrt()
}
