use super::*;
use crate::numerics::{build_grid, central_difference_gradient, spherical_harmonic, GridSpec};
use rand::{Rng, SeedableRng};

fn band2() -> BandSpec {
    BandSpec::c60_defaults()[1].clone()
}

fn random_point(rng: &mut impl Rng, r_lo: f64, r_hi: f64) -> [f64; 3] {
    let r: f64 = rng.gen_range(r_lo..r_hi);
    let ct: f64 = rng.gen_range(-0.99..0.99);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let st = (1.0 - ct * ct).sqrt();
    [r * st * phi.cos(), r * st * phi.sin(), r * ct]
}

#[test]
fn parabolic_energy_examples() {
    let b = band2();
    assert_eq!(parabolic_energy(&b, 0, 6.7).unwrap(), b.offset);
    let e1 = parabolic_energy(&b, 1, 6.7).unwrap() - b.offset;
    assert!((e1 - 0.022277).abs() < 1e-6);
    let spacing = parabolic_energy(&b, 5, 6.7).unwrap() - parabolic_energy(&b, 4, 6.7).unwrap();
    assert!((spacing - 10.0 / (2.0 * 6.7 * 6.7)).abs() < 1e-15);
    assert!((spacing - 0.111385).abs() < 5e-6);
    assert!((spacing * crate::numerics::constants::HARTREE_IN_EV - 3.03).abs() < 0.01);
    assert!(matches!(parabolic_energy(&b, 6, 6.7), Err(Error::Range { .. })));
}

#[test]
fn default_basis_counts() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let b2 = basis.band_orbitals(2);
    assert_eq!(b2.len(), 36);
    assert_eq!(basis.occupied(2).len(), 30);
    let b3 = basis.band_orbitals(3);
    assert_eq!(b3.len(), 16);
    assert!(b3.iter().all(|&i| !basis.orbitals[i].occupied));
    assert_eq!(basis.occupied(1).len(), 90);
    assert_eq!(basis.electron_count(), 240);

    // partially filled l = 5 shell: lowest |m| first
    let mut ms: Vec<i64> = basis
        .occupied(2)
        .into_iter()
        .filter(|&i| basis.orbitals[i].l == 5)
        .map(|i| basis.orbitals[i].magnetic_number().unwrap())
        .collect();
    ms.sort();
    assert_eq!(ms, vec![-2, -1, 0, 1, 2]);
}

#[test]
fn partial_shell_order_override() {
    let mut cfg = ModelConfig::c60();
    cfg.partial_shell_order.insert(2, vec![5, -5, 4, -4, 3]);
    let basis = build_basis(&cfg).unwrap();
    let mut ms: Vec<i64> = basis
        .occupied(2)
        .into_iter()
        .filter(|&i| basis.orbitals[i].l == 5)
        .map(|i| basis.orbitals[i].magnetic_number().unwrap())
        .collect();
    ms.sort();
    assert_eq!(ms, vec![-5, -4, 3, 4, 5]);
}

#[test]
fn zero_electrons_all_unoccupied() {
    let mut cfg = ModelConfig::c60();
    for b in &mut cfg.bands {
        b.electron_count = 0;
    }
    let basis = build_basis(&cfg).unwrap();
    assert!(basis.orbitals.iter().all(|o| !o.occupied));
}

#[test]
fn too_many_electrons_rejected() {
    let mut cfg = ModelConfig::c60();
    cfg.bands[2].electron_count = 34;
    assert!(matches!(build_basis(&cfg), Err(Error::Config(_))));
    cfg.bands[2].electron_count = 3;
    assert!(matches!(build_basis(&cfg), Err(Error::Config(_))));
}

#[test]
fn energies_nondecreasing_in_l() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    for n in 1..=3 {
        let idx = basis.band_orbitals(n);
        for w in idx.windows(2) {
            assert!(basis.orbitals[w[1]].energy >= basis.orbitals[w[0]].energy);
        }
    }
}

#[test]
fn coefficients_normalized() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    for o in &basis.orbitals {
        let n: f64 = o.coefficients.iter().map(|c| c.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
}

fn radial_grid() -> crate::numerics::QuadratureGrid {
    build_grid(GridSpec {
        r_min: 0.0,
        r_max: 4.0 * 6.7,
        radial_nodes: 160,
        angular_order: 24,
        basis_lmax: 9,
    })
    .unwrap()
}

fn radial_integral(f: impl Fn(f64) -> f64) -> f64 {
    let g = radial_grid();
    g.radial_nodes
        .iter()
        .zip(&g.radial_weights)
        .map(|(&r, &w)| w * f(r))
        .sum()
}

#[test]
fn shell_profile_normalized() {
    for b in BandSpec::c60_defaults() {
        let n = radial_integral(|r| radial_profile(&b, r).powi(2));
        assert!((n - 1.0).abs() < 1e-9, "band {} norm {n}", b.n);
    }
}

#[test]
fn shell_peak_location() {
    let b = BandSpec {
        shell_width: 0.3,
        ..band2()
    };
    let mut best = (0.0, 0.0);
    let mut r = 0.0;
    while r < 20.0 {
        let v = r * radial_profile(&b, r).abs();
        if v > best.1 {
            best = (r, v);
        }
        r += 1e-4;
    }
    assert!((best.0 - b.shell_radius).abs() < b.shell_width / 10.0);
}

#[test]
fn samo_shell_is_more_diffuse() {
    let bands = BandSpec::c60_defaults();
    let mean_r = |b: &BandSpec| radial_integral(|r| r * radial_profile(b, r).powi(2));
    assert!(mean_r(&bands[2]) > mean_r(&bands[1]));
}

#[test]
fn gaussian_overlap_closed_form() {
    let a = GaussianShell::new(6.7, 0.9);
    let b = GaussianShell::new(5.9, 3.0);
    let num = radial_integral(|r| a.value(r) * b.value(r));
    assert!((a.overlap(&b) - num).abs() < 1e-10);
    assert!((a.overlap(&a) - 1.0).abs() < 1e-12);
}

#[test]
fn orthogonalized_profiles_are_orthonormal() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let num = radial_integral(|r| basis.profile(i).value(r) * basis.profile(j).value(r));
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((num - want).abs() < 1e-9, "{i} {j}: {num}");
        }
    }
}

#[test]
fn s_orbital_is_spherical() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let s = basis.band_orbitals(3)[0];
    let a = basis.evaluate_orbital(s, [3.0, 4.0, 0.0]);
    let b = basis.evaluate_orbital(s, [0.0, 0.0, -5.0]);
    assert!((a - b).norm() < 1e-15);
}

#[test]
fn one_hot_d_orbital_matches_harmonic() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let idx = basis
        .band_orbitals(2)
        .into_iter()
        .find(|&i| basis.orbitals[i].l == 2 && basis.orbitals[i].magnetic_number() == Some(1))
        .unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..10 {
        let p = random_point(&mut rng, 1.0, 12.0);
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let y = spherical_harmonic(2, 1, (p[2] / r).acos(), p[1].atan2(p[0])).unwrap();
        let want = y * basis.profile(1).value(r);
        assert!((basis.evaluate_orbital(idx, p) - want).norm() < 1e-12);
    }
}

#[test]
fn tail_is_negligible() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    for n in [2u32, 3] {
        let i = basis.band_orbitals(n)[0];
        let b = &basis.bands[basis.orbitals[i].band];
        let peak = basis.evaluate_orbital(i, [b.shell_radius, 0.0, 0.0]).norm();
        let far = basis.evaluate_orbital(i, [10.0 * b.shell_radius, 0.0, 0.0]).norm();
        assert!(far < 1e-6 * peak);
    }
}

#[test]
fn gradient_matches_finite_difference() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let candidates: Vec<usize> = basis.band_orbitals(2).into_iter().chain(basis.band_orbitals(3)).collect();
    for _ in 0..50 {
        let p = random_point(&mut rng, 0.5, 20.0);
        let i = candidates[rng.gen_range(0..candidates.len())];
        let g = basis.evaluate_gradient(i, p).unwrap();
        let fd = central_difference_gradient(|q| basis.evaluate_orbital(i, q), p, 1e-4);
        let scale = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-6);
        for k in 0..3 {
            assert!((g[k] - fd[k]).norm() < 1e-6 * scale, "orbital {i} at {p:?}: {:?} vs {:?}", g, fd);
        }
    }
}

#[test]
fn s_gradient_is_radial() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let s = basis.band_orbitals(2)[0];
    let p = [1.0, -2.0, 4.5];
    let g = basis.evaluate_gradient(s, p).unwrap();
    let r = (1.0f64 + 4.0 + 20.25).sqrt();
    let rhat = [p[0] / r, p[1] / r, p[2] / r];
    let radial: num_complex::Complex64 = (0..3).map(|k| g[k] * rhat[k]).sum();
    for k in 0..3 {
        assert!((g[k] - radial * rhat[k]).norm() < 1e-14);
    }
}

#[test]
fn conjugate_gradient_symmetry() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let i = basis.band_orbitals(3)[6];
    let p = [2.0, 3.0, -1.0];
    let g = basis.evaluate_gradient(i, p).unwrap();
    let fd = central_difference_gradient(|q| basis.evaluate_orbital(i, q).conj(), p, 1e-4);
    for k in 0..3 {
        assert!((fd[k] - g[k].conj()).norm() < 1e-8);
    }
}

#[test]
fn gradient_at_origin_is_an_error() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    assert!(matches!(basis.evaluate_gradient(0, [0.0; 3]), Err(Error::SingularOrigin)));
}

#[test]
fn gram_matrix_is_identity() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let grid = radial_grid();
    let n = basis.orbitals.len();
    let mut gram = vec![num_complex::Complex64::new(0.0, 0.0); n * n];
    let lmax = basis.lmax();
    for ip in 0..grid.len() {
        let p = grid.point(ip);
        let w = grid.weight(ip);
        let h = crate::numerics::HarmonicsAtPoint::new(lmax, p);
        let vals: Vec<_> = (0..n).map(|i| basis.value_with(i, &h)).collect();
        for i in 0..n {
            let ci = vals[i].conj() * w;
            for j in 0..n {
                gram[i * n + j] += ci * vals[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((gram[i * n + j] - want).norm() < 1e-8, "({i},{j}) = {}", gram[i * n + j]);
        }
    }
}

#[test]
fn identity_symmetry_table_reproduces_spherical_mode() {
    let mut text = String::new();
    for l in 0..=9usize {
        for i in 0..=2 * l {
            let m = i as i64 - l as i64;
            text.push_str(&format!("{l} l{l} {i} {m} 1.0 0.0\n"));
        }
    }
    let table = load_symmetry_coefficients(&text).unwrap();
    let mut cfg = ModelConfig::c60();
    cfg.symmetry = Some(table);
    let a = build_basis(&cfg).unwrap();
    let b = build_basis(&ModelConfig::c60()).unwrap();
    assert_eq!(a.orbitals, b.orbitals);
}

#[test]
fn real_combination_is_real_on_meridian() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let text = format!("2 eg 0 2 {s} 0\n2 eg 0 -2 {s} 0\n2 eg 1 2 0 {s}\n2 eg 1 -2 0 -{s}\n2 t 0 1 1 0\n2 t 1 0 1 0\n2 t 2 -1 1 0\n");
    let mut cfg = ModelConfig::c60();
    cfg.symmetry = Some(load_symmetry_coefficients(&text).unwrap());
    let basis = build_basis(&cfg).unwrap();
    let i = basis
        .band_orbitals(2)
        .into_iter()
        .find(|&i| basis.orbitals[i].l == 2 && basis.orbitals[i].rep == "eg" && basis.orbitals[i].substate == 0)
        .unwrap();
    for t in [0.3f64, 1.0, 2.2] {
        let v = basis.evaluate_orbital(i, [6.0 * t.sin(), 0.0, 6.0 * t.cos()]);
        assert!(v.im.abs() < 1e-15 && v.re.abs() > 1e-6);
    }
}

#[test]
fn laplacian_matches_finite_difference() {
    let basis = build_basis(&ModelConfig::c60()).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(17);
    for _ in 0..30 {
        let idx = rng.gen_range(0..basis.orbitals.len());
        let r = rng.gen_range(2.0..15.0);
        let ct: f64 = rng.gen_range(-0.95..0.95);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let st = (1.0 - ct * ct).sqrt();
        let p = [r * st * phi.cos(), r * st * phi.sin(), r * ct];
        let h = 1e-3;
        let mut fd = -6.0 * basis.evaluate_orbital(idx, p);
        for axis in 0..3 {
            for s in [-1.0, 1.0] {
                let mut q = p;
                q[axis] += s * h;
                fd += basis.evaluate_orbital(idx, q);
            }
        }
        fd /= h * h;
        let lap = basis.laplacian_with(idx, &HarmonicsAtPoint::new(basis.lmax(), p));
        let scale = basis.evaluate_orbital(idx, p).norm().max(lap.norm()).max(1e-8);
        assert!((lap - fd).norm() < 1e-4 * scale, "{idx}: {lap} vs {fd}");
    }
}
