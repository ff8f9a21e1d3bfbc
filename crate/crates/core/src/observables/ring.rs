use super::{CurrentConvention, CurrentField};
use crate::numerics::gauss_legendre;

/// Counter-clockwise current loop of total current `current` and radius
/// `radius` in the xy plane, smeared into a Gaussian tube of width
/// `tube_width` and sampled on a tube-adapted quadrature.
///
/// Samples carry the current as given (probability convention), so the
/// loop has `m_z = pi I (a^2 + s^2)` and `B_z(0) ~ mu0 I / (2a)`.
pub fn synthetic_ring(current: f64, radius: f64, tube_width: f64, n_phi: usize, n_tube: usize) -> CurrentField {
    let s = tube_width;
    let d_max = 8.0 * s;
    let (x, w) = gauss_legendre(n_tube);
    let n_psi = 2 * n_tube;
    let dphi = std::f64::consts::TAU / n_phi as f64;
    let dpsi = std::f64::consts::TAU / n_psi as f64;
    let density = current / (std::f64::consts::TAU * s * s);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut j = Vec::new();
    for ip in 0..n_phi {
        let (sp, cp) = (ip as f64 * dphi).sin_cos();
        for (&xi, &wi) in x.iter().zip(&w) {
            let d = 0.5 * d_max * (xi + 1.0);
            let wd = 0.5 * d_max * wi;
            let g = density * (-(d * d) / (2.0 * s * s)).exp();
            for iq in 0..n_psi {
                let (sq, cq) = (iq as f64 * dpsi).sin_cos();
                let rho = radius + d * cq;
                let z = d * sq;
                points.push([rho * cp, rho * sp, z]);
                weights.push(rho * dphi * d * wd * dpsi);
                j.push([-g * sp, g * cp, 0.0]);
            }
        }
    }
    CurrentField {
        points,
        weights,
        j,
        convention: CurrentConvention::Probability,
        boundary_ratio: None,
    }
}
