use super::*;
use crate::beam::{rho_max, Normalization, VortexPulse};
use crate::coupling::{build_transition_set, transition_grid_spec, TransitionSpec};
use crate::dynamics::excite;
use crate::numerics::{build_grid, constants::BOHR_IN_NM, spherical_harmonic, GridSpec};
use crate::structure::{build_basis, ModelConfig};
use rand::{Rng, SeedableRng};

const W0: f64 = 50.0 / BOHR_IN_NM;

pub(super) fn basis() -> Basis {
    build_basis(&ModelConfig::c60()).unwrap()
}

fn grid_for(charge: i32) -> QuadratureGrid {
    let base = GridSpec {
        r_min: 0.0,
        r_max: 40.0,
        radial_nodes: 96,
        angular_order: 16,
        basis_lmax: 5,
    };
    build_grid(transition_grid_spec(base, 5, 3, charge)).unwrap()
}

fn current_grid() -> QuadratureGrid {
    build_grid(GridSpec {
        r_min: R_CUT,
        r_max: 40.0,
        radial_nodes: 96,
        angular_order: 24,
        basis_lmax: 3,
    })
    .unwrap()
}

// l=4 -> l=3 gap of the default model
fn resonant_omega(b: &Basis) -> f64 {
    let e = |band: u32, l: usize| {
        b.orbitals
            .iter()
            .find(|o| o.n == band && o.l == l)
            .map(|o| o.energy)
            .unwrap()
    };
    e(3, 3) - e(2, 4)
}

pub(super) fn excitation(b: &Basis, charge: i32, axis: [f64; 2]) -> ExcitationState {
    let p = VortexPulse::new(1e-3, charge, 0, W0, resonant_omega(b), 1.6e-5, axis, Normalization::Peak).unwrap();
    let ts = build_transition_set(b, &p, &grid_for(charge), &TransitionSpec::default()).unwrap();
    excite(&ts, b, &p).unwrap()
}

fn random_point(rng: &mut impl Rng) -> [f64; 3] {
    let r: f64 = rng.gen_range(3.0..12.0);
    let ct: f64 = rng.gen_range(-0.95..0.95);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let st = (1.0 - ct * ct).sqrt();
    [r * st * phi.cos(), r * st * phi.sin(), r * ct]
}

#[test]
fn degenerate_groups_follow_shells() {
    let b = basis();
    let targets = b.unoccupied(3);
    let groups = degenerate_groups(&b, &targets, DEGENERACY_TOLERANCE);
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    assert_eq!(sizes, vec![1, 3, 5, 7]);
    assert_eq!(degenerate_groups(&b, &targets, 1.0).len(), 1);
}

#[test]
fn gaussian_beam_drives_no_current() {
    let b = basis();
    let reference = CurrentEvaluator::new(&excitation(&b, 1, [rho_max(1, W0).unwrap(), 0.0]), &b, DEGENERACY_TOLERANCE);
    let none = CurrentEvaluator::new(&excitation(&b, 0, [0.0; 2]), &b, DEGENERACY_TOLERANCE);
    let offset = CurrentEvaluator::new(&excitation(&b, 0, [500.0, 0.0]), &b, DEGENERACY_TOLERANCE);
    let g = current_grid();
    let scale = sample_current(&reference, &g, CurrentConvention::Charge).max_abs();
    assert!(scale > 0.0);
    for ev in [&none, &offset] {
        let f = sample_current(ev, &g, CurrentConvention::Charge);
        assert!(f.max_abs() < 1e-12 * scale, "{}", f.max_abs() / scale);
    }
}

#[test]
fn pure_angular_momentum_state_current() {
    let b = basis();
    let targets = b.unoccupied(3);
    let target = targets
        .iter()
        .position(|&i| b.orbitals[i].l == 3 && b.orbitals[i].magnetic_number() == Some(3))
        .unwrap();
    let amp = Complex64::new(3e-3, -4e-3);
    let mut amplitudes = vec![ZERO; targets.len()];
    amplitudes[target] = amp;
    let ex = ExcitationState::from_amplitudes(vec![b.occupied(2)[0]], targets.clone(), amplitudes, vec![1.0; targets.len()]).unwrap();
    let ev = CurrentEvaluator::new(&ex, &b, DEGENERACY_TOLERANCE);
    let prof = b.profile(b.orbitals[targets[target]].band);
    let mut rng = rand::rngs::StdRng::seed_from_u64(2);
    for _ in 0..30 {
        let p = random_point(&mut rng);
        let j = ev.at(p).unwrap();
        let r = norm(p);
        let rho = p[0].hypot(p[1]);
        let theta = (p[2] / r).acos();
        let phi = p[1].atan2(p[0]);
        let y = spherical_harmonic(3, 3, theta, phi).unwrap();
        let rad = prof.value(r);
        let expect = 2.0 * amp.norm_sqr() * 3.0 * rad * rad * y.norm_sqr() / rho;
        let jphi = (-p[1] * j[0] + p[0] * j[1]) / rho;
        let jrho = (p[0] * j[0] + p[1] * j[1]) / rho;
        assert!((jphi - expect).abs() < 1e-12 * expect.abs().max(1e-300));
        assert!(jrho.abs() < 1e-12 * expect && j[2].abs() < 1e-12 * expect);
    }
}

#[test]
fn charge_sign_flips_current() {
    let b = basis();
    let axis = [300.0, -200.0];
    let plus = CurrentEvaluator::new(&excitation(&b, 2, axis), &b, DEGENERACY_TOLERANCE);
    let minus = CurrentEvaluator::new(&excitation(&b, -2, axis), &b, DEGENERACY_TOLERANCE);
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let mut scale: f64 = 0.0;
    let samples: Vec<([f64; 3], [f64; 3])> = (0..40)
        .map(|_| {
            let p = random_point(&mut rng);
            let a = plus.at(p).unwrap();
            scale = scale.max(norm(a));
            (a, minus.at(p).unwrap())
        })
        .collect();
    assert!(scale > 0.0);
    for (a, m) in samples {
        for c in 0..3 {
            assert!((a[c] + m[c]).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn synthetic_ring_oracles() {
    let (i, a) = (0.37, 6.7);
    let field = synthetic_ring(i, a, 0.01 * a, 64, 16);
    let m = magnetic_moment(&field);
    let exact_m = i * std::f64::consts::PI * a * a;
    assert!((m[2] / exact_m - 1.0).abs() < 1e-3, "{}", m[2] / exact_m);
    assert!(m[0].abs() < 1e-12 * exact_m && m[1].abs() < 1e-12 * exact_m);
    let bz = b_field_center(&field)[2];
    let exact_b = FINE_STRUCTURE * FINE_STRUCTURE * std::f64::consts::TAU * i / a;
    assert!((bz / exact_b - 1.0).abs() < 1e-3, "{}", bz / exact_b);
    let res = magnetics(&field);
    assert!((res.effective_radius.unwrap() / a - 1.0).abs() < 1e-3);
    assert!((res.moment_bohr_magnetons[2] - 2.0 * m[2]).abs() < 1e-12 * m[2]);
}

#[test]
fn ring_is_purely_azimuthal() {
    let field = synthetic_ring(1.0, 5.0, 0.1, 32, 8);
    let c = cylindrical_decomposition(&field);
    assert!(c.rho < 1e-14 * c.phi && c.z == 0.0);
    assert!((c.phi - field.l2_norm()).abs() < 1e-12 * c.phi);
}

#[test]
fn integrals_are_linear_in_current() {
    let field = synthetic_ring(1.0, 5.0, 0.1, 32, 8);
    let m1 = magnetic_moment(&field);
    let m2 = magnetic_moment(&field.scaled(2.0));
    let b1 = b_field_center(&field);
    let b2 = b_field_center(&field.scaled(2.0));
    for k in 0..3 {
        assert_eq!(m2[k], 2.0 * m1[k]);
        assert_eq!(b2[k], 2.0 * b1[k]);
    }
}

#[test]
fn charge_convention_flips_sign() {
    let mut field = synthetic_ring(1.0, 5.0, 0.1, 32, 8);
    let prob = magnetic_moment(&field)[2];
    field.convention = CurrentConvention::Charge;
    assert_eq!(magnetic_moment(&field)[2], -prob);
}

#[test]
fn mirror_symmetric_field_has_axial_moment() {
    let b = basis();
    let ev = CurrentEvaluator::new(&excitation(&b, 1, [0.0; 2]), &b, DEGENERACY_TOLERANCE);
    let f = sample_current(&ev, &current_grid(), CurrentConvention::Charge);
    let m = magnetic_moment(&f);
    assert!(m[2] != 0.0);
    assert!(m[0].abs() < 1e-8 * m[2].abs() && m[1].abs() < 1e-8 * m[2].abs());
}

#[test]
fn degenerate_interference_is_divergence_free() {
    let b = basis();
    let ex = excitation(&b, 2, [400.0, 100.0]);
    let g = current_grid();
    let ok = CurrentEvaluator::new(&ex, &b, DEGENERACY_TOLERANCE);
    assert!(divergence_diagnostic(&ok, &g) < DIVERGENCE_TOLERANCE);
    let abused = CurrentEvaluator::new(&ex, &b, 1.0);
    assert!(divergence_diagnostic(&abused, &g) > 1e2 * DIVERGENCE_TOLERANCE);
}

#[test]
fn plane_lattice_format_and_zero_case() {
    let b = basis();
    let ev = CurrentEvaluator::new(&excitation(&b, 0, [0.0; 2]), &b, DEGENERACY_TOLERANCE);
    assert!(sample_current_plane(&ev, Plane::Xy, 20.0, 16).is_err());
    let lat = sample_current_plane(&ev, Plane::Xz, 20.0, 32).unwrap();
    assert_eq!(lat.points.len(), 32 * 32);
    let mut buf = Vec::new();
    lat.write(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# plane=xz extent=20 resolution=32\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1024);
    assert!(ring_count(&lat).is_err());
}

#[test]
fn xz_lattice_mirror_symmetric_for_centered_run() {
    let b = basis();
    let ev = CurrentEvaluator::new(&excitation(&b, 1, [0.0; 2]), &b, DEGENERACY_TOLERANCE);
    let lat = sample_current_plane(&ev, Plane::Xz, 20.0, 32).unwrap();
    let n = lat.resolution;
    let scale = lat.j.iter().map(|v| norm(*v)).fold(0.0, f64::max);
    for row in 0..n {
        for col in 0..n {
            let a = lat.j[row * n + col];
            let m = lat.j[(n - 1 - row) * n + col];
            assert!((a[0] - m[0]).abs() < 1e-10 * scale);
            assert!((a[1] - m[1]).abs() < 1e-10 * scale);
            assert!((a[2] + m[2]).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn ring_count_of_synthetic_profile() {
    // two concentric pure-m states in different bands give two rings
    let b = basis();
    let targets = b.unoccupied(3);
    let t = targets.iter().position(|&i| b.orbitals[i].magnetic_number() == Some(1) && b.orbitals[i].l == 1).unwrap();
    let mut amplitudes = vec![ZERO; targets.len()];
    amplitudes[t] = Complex64::new(1.0, 0.0);
    let ex = ExcitationState::from_amplitudes(vec![0], targets, amplitudes, vec![1.0; 16]).unwrap();
    let ev = CurrentEvaluator::new(&ex, &b, DEGENERACY_TOLERANCE);
    let lat = sample_current_plane(&ev, Plane::Xy, 30.0, 128).unwrap();
    assert!(ring_count(&lat).unwrap() >= 1);
}
