//! Linearly polarized Laguerre-Gaussian vortex pulse.
//!
//! The positive-frequency vector potential is
//! `x_hat * C * f(rho') * exp(i m phi') * exp(-delta t^2) * exp(-i omega t)`
//! where `rho', phi'` are measured from the optical axis, which sits at
//! `axis` in the cage frame. The longitudinal phase `exp(i q_z z)` is taken
//! as 1 across the molecule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::constants::{field_from_intensity, intensity_from_field, ATOMIC_TIME_IN_FS};
use crate::numerics::laguerre::{laguerre, laguerre_derivative};

/// How the mode amplitude is normalized across topological charges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Ring peak of `|A|` equals `A0` for every charge.
    #[default]
    Peak,
    /// `C = A0 / (|m|^{|m|/2} e^{+|m|/2})`, kept for comparison with the
    /// printed normalization; the peak then falls below `A0` by `e^{-|m|}`.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VortexPulse {
    /// Positive-frequency vector-potential amplitude, a.u.
    pub a0: f64,
    pub charge: i32,
    pub radial_index: u32,
    /// Beam waist, bohr.
    pub waist: f64,
    /// Carrier frequency, hartree.
    pub omega: f64,
    /// Envelope parameter of `exp(-delta t^2)`, a.u.^-2.
    pub delta: f64,
    /// Optical-axis position in the cage frame (x, y), bohr.
    pub axis: [f64; 2],
    /// Longitudinal wavenumber; carried for bookkeeping only.
    pub qz: f64,
    pub normalization: Normalization,
    coefficient: f64,
}

impl VortexPulse {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a0: f64,
        charge: i32,
        radial_index: u32,
        waist: f64,
        omega: f64,
        delta: f64,
        axis: [f64; 2],
        normalization: Normalization,
    ) -> Result<Self> {
        if !(waist > 0.0) {
            return Err(Error::Parameter {
                name: "waist",
                reason: format!("{waist} must be positive"),
            });
        }
        if !(delta > 0.0) {
            return Err(Error::Parameter {
                name: "delta",
                reason: format!("{delta} must be positive"),
            });
        }
        if charge.unsigned_abs() > 40 {
            return Err(Error::Parameter {
                name: "charge",
                reason: format!("|{charge}| exceeds 40"),
            });
        }
        if radial_index > 8 {
            return Err(Error::Parameter {
                name: "radial_index",
                reason: format!("{radial_index} exceeds 8"),
            });
        }
        if !a0.is_finite() || !omega.is_finite() {
            return Err(Error::Parameter {
                name: "a0/omega",
                reason: "must be finite".into(),
            });
        }
        let coefficient = normalization_with(a0, charge, radial_index, normalization);
        Ok(Self {
            a0,
            charge,
            radial_index,
            waist,
            omega,
            delta,
            axis,
            qz: 0.0,
            normalization,
            coefficient,
        })
    }

    /// Same pulse with a different amplitude.
    pub fn with_a0(&self, a0: f64) -> Self {
        let mut p = self.clone();
        p.a0 = a0;
        p.coefficient = normalization_with(a0, p.charge, p.radial_index, p.normalization);
        p
    }

    pub fn with_charge(&self, charge: i32) -> Result<Self> {
        Self::new(
            self.a0,
            charge,
            self.radial_index,
            self.waist,
            self.omega,
            self.delta,
            self.axis,
            self.normalization,
        )
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        let mut p = self.clone();
        p.omega = omega;
        p
    }

    pub fn with_axis(&self, axis: [f64; 2]) -> Self {
        let mut p = self.clone();
        p.axis = axis;
        p
    }

    /// Mode coefficient `C_{m,p}`.
    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn offset(&self) -> f64 {
        self.axis[0].hypot(self.axis[1])
    }

    /// Peak electric field `omega * A0`.
    pub fn peak_field(&self) -> f64 {
        self.omega * self.a0
    }

    /// Cycle-averaged peak intensity in W/cm^2 with `E0 = omega * A0`.
    pub fn intensity_w_cm2(&self) -> f64 {
        intensity_from_field(self.peak_field())
    }

    #[inline]
    pub fn envelope(&self, t: f64) -> f64 {
        (-self.delta * t * t).exp()
    }

    /// Spatial factor of the positive-frequency `A_x` (time factors removed).
    #[inline]
    pub fn spatial(&self, point: [f64; 3]) -> Complex64 {
        self.spatial_with_divergence(point).0
    }

    /// `(A_x, dA_x/dx)` of the positive-frequency spatial factor.
    ///
    /// Written as `C (sqrt2/w0)^|m| u^|m| g(rho'^2)` with
    /// `u = x' + i sgn(m) y'`, which is smooth on the vortex axis.
    pub fn spatial_with_divergence(&self, point: [f64; 3]) -> (Complex64, Complex64) {
        let xp = point[0] - self.axis[0];
        let yp = point[1] - self.axis[1];
        let q = xp * xp + yp * yp;
        let w2 = self.waist * self.waist;
        let am = self.charge.unsigned_abs();
        let big_x = 2.0 * q / w2;
        let gauss = (-q / w2).exp();
        let lag = laguerre(self.radial_index, am, big_x);
        let g = gauss * lag;
        let dg_dq = gauss * (-lag / w2 + 2.0 / w2 * laguerre_derivative(self.radial_index, am, big_x));

        let sign = if self.charge < 0 { -1.0 } else { 1.0 };
        let scale = std::f64::consts::SQRT_2 / self.waist;
        let z = Complex64::new(xp, sign * yp) * scale;
        let (zm, dzm) = if am == 0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            let zm1 = z.powu(am - 1);
            (zm1 * z, zm1 * (am as f64 * scale))
        };
        let c = self.coefficient;
        let a = zm * (c * g);
        let div = dzm * (c * g) + zm * (c * dg_dq * 2.0 * xp);
        (a, div)
    }
}

/// Radius of peak intensity, `sqrt(|m|/2) w0`.
pub fn rho_max(charge: i32, waist: f64) -> Result<f64> {
    if charge == 0 {
        return Err(Error::UndefinedForZeroCharge);
    }
    Ok((charge.unsigned_abs() as f64 / 2.0).sqrt() * waist)
}

/// Peak-normalized mode coefficient `C_{m,p}`.
pub fn normalization(a0: f64, charge: i32, radial_index: u32) -> f64 {
    normalization_with(a0, charge, radial_index, Normalization::Peak)
}

pub fn normalization_with(a0: f64, charge: i32, radial_index: u32, convention: Normalization) -> f64 {
    let am = charge.unsigned_abs() as f64;
    if radial_index == 0 {
        if charge == 0 {
            return a0;
        }
        let exponent = match convention {
            Normalization::Peak => -am / 2.0,
            Normalization::Literal => am / 2.0,
        };
        return a0 / (am.powf(am / 2.0) * exponent.exp());
    }
    a0 / profile_peak(charge.unsigned_abs(), radial_index)
}

// max over X >= 0 of |exp(-X/2) X^{|m|/2} L_p^{|m|}(X)|, X = 2 rho'^2 / w0^2
fn profile_peak(am: u32, p: u32) -> f64 {
    let h = |x: f64| ((-x / 2.0).exp() * x.powf(am as f64 / 2.0) * laguerre(p, am, x)).abs();
    let hi = 4.0 * (2.0 * p as f64 + am as f64 + 1.0) + 40.0;
    let n = 20_000;
    let (mut best_x, mut best) = (0.0, h(0.0));
    for i in 1..=n {
        let x = hi * i as f64 / n as f64;
        let v = h(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    // golden-section refinement inside the bracketing cell
    let step = hi / n as f64;
    let (mut a, mut b) = ((best_x - step).max(0.0), best_x + step);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if h(c) > h(d) {
            b = d;
        } else {
            a = c;
        }
    }
    h(0.5 * (a + b)).max(best)
}

/// `C * exp(-rho'^2/w0^2) * (sqrt2 rho'/w0)^|m| * L_p^|m|(2 rho'^2/w0^2)`.
pub fn mode_profile(pulse: &VortexPulse, rho: f64) -> f64 {
    let am = pulse.charge.unsigned_abs();
    let s = std::f64::consts::SQRT_2 * rho / pulse.waist;
    pulse.coefficient
        * (-(rho * rho) / (pulse.waist * pulse.waist)).exp()
        * s.powi(am as i32)
        * laguerre(pulse.radial_index, am, s * s)
}

/// Positive-frequency vector potential at `point` and time `t`.
pub fn vector_potential(pulse: &VortexPulse, point: [f64; 3], t: f64) -> [Complex64; 3] {
    let phase = Complex64::from_polar(pulse.envelope(t), -pulse.omega * t);
    let zero = Complex64::new(0.0, 0.0);
    [pulse.spatial(point) * phase, zero, zero]
}

/// `div A = dA_x/dx` of the positive-frequency part.
pub fn divergence_a(pulse: &VortexPulse, point: [f64; 3], t: f64) -> Complex64 {
    let phase = Complex64::from_polar(pulse.envelope(t), -pulse.omega * t);
    pulse.spatial_with_divergence(point).1 * phase
}

/// Amplitude FWHM `2 sqrt(ln2 / delta)` in femtoseconds.
pub fn envelope_fwhm(delta: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 / delta).sqrt() * ATOMIC_TIME_IN_FS
}

pub fn delta_from_fwhm(fwhm_fs: f64) -> f64 {
    let t = fwhm_fs / ATOMIC_TIME_IN_FS / 2.0;
    std::f64::consts::LN_2 / (t * t)
}

/// `A0` (a.u.) giving peak intensity `intensity_w_cm2` at carrier `omega` (hartree).
pub fn a0_from_intensity(intensity_w_cm2: f64, omega: f64) -> f64 {
    field_from_intensity(intensity_w_cm2) / omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::central_difference_gradient;
    use crate::numerics::constants::BOHR_IN_NM;
    use rand::{Rng, SeedableRng};

    const W0: f64 = 50.0 / BOHR_IN_NM;

    fn pulse(charge: i32, axis: [f64; 2]) -> VortexPulse {
        VortexPulse::new(0.05, charge, 0, W0, 0.3, 1.6e-5, axis, Normalization::Peak).unwrap()
    }

    #[test]
    fn rho_max_examples() {
        assert!((rho_max(2, 50.0).unwrap() - 50.0).abs() < 1e-12);
        assert!((rho_max(1, 50.0).unwrap() - 35.355).abs() < 1e-3);
        assert!((rho_max(8, 50.0).unwrap() - 100.0).abs() < 1e-12);
        assert!(matches!(rho_max(0, 50.0), Err(Error::UndefinedForZeroCharge)));
    }

    #[test]
    fn profile_center_values() {
        let p0 = pulse(0, [0.0; 2]);
        assert!((mode_profile(&p0, 0.0) - p0.coefficient()).abs() < 1e-15);
        assert!(mode_profile(&p0, 0.0) > 0.0);
        for m in 1..5 {
            assert_eq!(mode_profile(&pulse(m, [0.0; 2]), 0.0), 0.0);
        }
    }

    fn scan_max(p: &VortexPulse) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        let n = 200_000;
        for i in 0..=n {
            let rho = 4.0 * W0 * i as f64 / n as f64;
            let v = mode_profile(p, rho).abs();
            if v > best.1 {
                best = (rho, v);
            }
        }
        best
    }

    #[test]
    fn profile_peaks_at_rho_max() {
        let p = pulse(3, [0.0; 2]);
        let (rho, _) = scan_max(&p);
        assert!((rho - rho_max(3, W0).unwrap()).abs() < 4.0 * W0 / 200_000.0 * 2.0);
    }

    #[test]
    fn normalized_peak_equals_a0() {
        assert_eq!(normalization(0.7, 0, 0), 0.7);
        let p = pulse(2, [0.0; 2]);
        let at_peak = mode_profile(&p, rho_max(2, W0).unwrap());
        assert!((at_peak - p.a0).abs() < 1e-12 * p.a0);
        let p = pulse(5, [0.0; 2]);
        let (_, v) = scan_max(&p);
        assert!(v <= p.a0 * (1.0 + 1e-12) && v > p.a0 * (1.0 - 1e-8));
        for m in -15..=15 {
            let p = pulse(m, [0.0; 2]);
            let peak = if m == 0 { mode_profile(&p, 0.0) } else { mode_profile(&p, rho_max(m, W0).unwrap()) };
            assert!((peak - p.a0).abs() < 1e-10 * p.a0, "m={m}");
        }
    }

    #[test]
    fn literal_normalization_is_lower_by_exp_m() {
        let peak = normalization_with(1.0, 3, 0, Normalization::Peak);
        let lit = normalization_with(1.0, 3, 0, Normalization::Literal);
        assert!((lit / peak - (-3.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn radial_index_peak_normalized() {
        for (m, p) in [(0, 2), (1, 1), (3, 2), (2, 4)] {
            let pl = VortexPulse::new(1.0, m, p, W0, 0.3, 1e-5, [0.0; 2], Normalization::Peak).unwrap();
            let (_, v) = scan_max(&pl);
            assert!((v - 1.0).abs() < 1e-6, "m={m} p={p}: {v}");
        }
    }

    #[test]
    fn profile_symmetric_in_charge_sign() {
        for rho in [0.0, 100.0, 700.0, 2000.0] {
            assert_eq!(mode_profile(&pulse(3, [0.0; 2]), rho), mode_profile(&pulse(-3, [0.0; 2]), rho));
        }
    }

    #[test]
    fn vortex_core_is_dark() {
        let a = vector_potential(&pulse(1, [0.0; 2]), [0.0, 0.0, 2.0], 0.0);
        assert!(a.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn half_turn_phase() {
        let p = pulse(1, [0.0; 2]);
        let a = p.spatial([300.0, 200.0, 0.0]);
        let b = p.spatial([-300.0, -200.0, 0.0]);
        assert!((a + b).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn magnitude_independent_of_azimuth() {
        let p = pulse(2, [0.0; 2]);
        let r = 500.0;
        let base = p.spatial([r, 0.0, 0.0]).norm();
        for k in 1..12 {
            let phi = k as f64 * 0.5;
            let v = p.spatial([r * phi.cos(), r * phi.sin(), 1.0]).norm();
            assert!((v - base).abs() < 1e-13 * base);
        }
    }

    #[test]
    fn envelope_suppression() {
        let p = pulse(1, [0.0; 2]);
        let pt = [600.0, 100.0, 0.0];
        let t = 3.0 / p.delta.sqrt();
        let r = vector_potential(&p, pt, t)[0].norm() / vector_potential(&p, pt, 0.0)[0].norm();
        assert!((r - (-9.0f64).exp()).abs() < 1e-15);
        assert_eq!(p.envelope(t), p.envelope(-t));
    }

    #[test]
    fn fwhm_values() {
        let f = envelope_fwhm(1.6e-5);
        assert!((f - 10.07).abs() < 0.01, "{f}");
        assert!((f / 10.0 - 1.0).abs() < 0.01);
        assert!((envelope_fwhm(4.0 * 1.6e-5) - f / 2.0).abs() < 1e-12);
        let d = delta_from_fwhm(20.0);
        let t = 10.0 / ATOMIC_TIME_IN_FS;
        assert!((d / (std::f64::consts::LN_2 / (t * t)) - 1.0).abs() < 1e-12, "{d}");
        assert!((envelope_fwhm(d) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_divergence_vanishes_at_center() {
        let p = pulse(0, [0.0; 2]);
        assert!(divergence_a(&p, [0.0, 0.0, 0.0], 0.0).norm() < 1e-30);
    }

    #[test]
    fn divergence_matches_finite_difference() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let m: i32 = rng.gen_range(-6..=6);
            let pr: u32 = rng.gen_range(0..=2);
            let axis = [rng.gen_range(-1500.0..1500.0), rng.gen_range(-1500.0..1500.0)];
            let p = VortexPulse::new(0.1, m, pr, W0, 0.3, 1e-5, axis, Normalization::Peak).unwrap();
            let pt = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
            let fd = central_difference_gradient(|q| p.spatial(q), pt, 2e-2)[0];
            let d = divergence_a(&p, pt, 0.0);
            let scale = d.norm().max(1e-12 * p.a0 / W0);
            assert!((fd - d).norm() < 1e-7 * scale.max(fd.norm()), "m={m} p={pr}: {d} vs {fd}");
        }
    }

    #[test]
    fn far_field_divergence_negligible() {
        let p = pulse(1, [0.0; 2]);
        let d = divergence_a(&p, [10.0 * W0, 0.0, 0.0], 0.0);
        assert!(d.norm() < 1e-20 * p.a0 / W0);
    }

    #[test]
    fn intensity_round_trip() {
        let a0 = a0_from_intensity(3e13, 0.3);
        let p = pulse(1, [0.0; 2]).with_a0(a0);
        assert!((p.intensity_w_cm2() / 3e13 - 1.0).abs() < 1e-12);
    }
}
