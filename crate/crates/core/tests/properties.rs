mod common;

use std::f64::consts::PI;

use magrhf_core::density::{current, density, magnetisation, DensityMatrix};
use magrhf_core::fields::{curl, divergence, gradient, helmholtz_project, laplacian, poisson_potential};
use magrhf_core::io::{parse_config, Checkpoint, RunConfig};
use magrhf_core::pauli::{apply_pauli_kinetic, apply_sigma_dot_pa, BoundaryMode, MagneticPotential, Nucleus};
use magrhf_core::scf::fermi_fill;
use magrhf_core::tf::{penalised_f, tf_energy, PenalisedInput, RadialGrid, TFDensity};
use magrhf_core::zero_modes::{dilate, f_z, loss_yau};
use magrhf_core::{Cell, ScalarField, SpinorField, VectorField, C64};
use proptest::prelude::*;

use common::*;

fn small_cell(len: f64) -> Cell {
    Cell::new(len, 8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fft_roundtrip_and_parseval(seed in any::<u64>(), len in 1.0f64..20.0) {
        let cell = small_cell(len);
        let mut r = rng(seed);
        let f = ScalarField::from_values(cell, (0..cell.len()).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect()).unwrap();
        let c = f.fourier();
        let back = ScalarField::from_fourier(cell, c.clone()).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() < 1e-13);
        let real_side = f.inner(&f).unwrap();
        let spectral: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell.volume();
        prop_assert!(rel(spectral, real_side) < 1e-12);
    }

    #[test]
    fn projection_is_solenoidal_and_idempotent(seed in any::<u64>(), zero_mean in any::<bool>()) {
        let cell = small_cell(7.0);
        let mut r = rng(seed);
        let v = VectorField::from_components([0, 1, 2].map(|_| {
            ScalarField::from_values(cell, (0..cell.len()).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect()).unwrap()
        })).unwrap();
        let p = helmholtz_project(&v, zero_mean);
        prop_assert!(divergence(&p).max_abs() < 1e-12);
        let pp = helmholtz_project(&p, zero_mean);
        prop_assert!(pp.sub(&p).unwrap().max_abs() < 1e-13);
        // the removed part is a gradient
        prop_assert!(curl(&v.sub(&p).unwrap()).max_abs() < 1e-11 || zero_mean);
    }

    #[test]
    fn vector_identities(seed in any::<u64>()) {
        let cell = small_cell(5.0);
        let mut r = rng(seed);
        let f = band_scalar(&cell, 3, &mut r);
        let v = band_vector(&cell, 3, &mut r);
        prop_assert!(curl(&gradient(&f)).max_abs() < 1e-12);
        prop_assert!(divergence(&curl(&v)).max_abs() < 1e-12);
    }

    #[test]
    fn poisson_inverts_laplacian(seed in any::<u64>(), len in 2.0f64..15.0) {
        let cell = small_cell(len);
        let mut r = rng(seed);
        let rho = ScalarField::from_values(cell, (0..cell.len()).map(|_| rand::Rng::gen_range(&mut r, 0.0..1.0)).collect()).unwrap();
        let phi = poisson_potential(&rho);
        let lhs = laplacian(&phi).scaled(-1.0);
        let rhs = rho.map(|v| v - rho.mean()).scaled(4.0 * PI);
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-11 * rhs.max_abs().max(1.0));
        prop_assert!(phi.mean().abs() < 1e-12);
    }

    #[test]
    fn pauli_operator_is_square_of_dirac(seed in any::<u64>(), periodic in any::<bool>()) {
        let cell = Cell::new(6.0, 12).unwrap();
        let mut r = rng(seed);
        let band = 12 / 4 - 1;
        let a = MagneticPotential::new(band_vector(&cell, band, &mut r).scaled(0.7), periodic);
        let psi = band_spinor(&cell, band, &mut r);
        let k = apply_pauli_kinetic(&psi, &a).unwrap();
        let d = apply_sigma_dot_pa(&apply_sigma_dot_pa(&psi, &a).unwrap(), &a).unwrap();
        let diff = k.sub(&d.scaled(C64::new(0.5, 0.0))).unwrap().norm();
        prop_assert!(diff < 1e-10 * k.norm(), "diff {diff}");
        // ⟨ψ, Kψ⟩ = ½‖σ·(p+A)ψ‖² ≥ 0
        let e = psi.inner(&k).unwrap();
        let s = apply_sigma_dot_pa(&psi, &a).unwrap().norm_sqr();
        prop_assert!(e.re >= 0.0);
        prop_assert!(rel(e.re, 0.5 * s) < 1e-10);
        prop_assert!(e.im.abs() < 1e-10 * e.re);
    }

    #[test]
    fn pauli_operator_is_hermitian(seed in any::<u64>()) {
        let cell = small_cell(4.0);
        let mut r = rng(seed);
        let a = MagneticPotential::new(band_vector(&cell, 3, &mut r), false);
        let phi = random_spinor(&cell, &mut r);
        let psi = random_spinor(&cell, &mut r);
        let lhs = phi.inner(&apply_pauli_kinetic(&psi, &a).unwrap()).unwrap();
        let rhs = apply_pauli_kinetic(&phi, &a).unwrap().inner(&psi).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn density_observables(seed in any::<u64>(), rank in 1usize..5) {
        let cell = small_cell(5.0);
        let mut r = rng(seed);
        let orbitals = orthonormalise((0..rank).map(|_| random_spinor(&cell, &mut r)).collect());
        let occ: Vec<f64> = (0..rank).map(|_| rand::Rng::gen_range(&mut r, 0.0..=1.0)).collect();
        let gamma = DensityMatrix::new(orbitals, occ, BoundaryMode::Molecular).unwrap();
        let rho = density(&gamma);
        prop_assert!(rel(rho.integral(), gamma.trace()) < 1e-10);
        let m = magnetisation(&gamma).magnitude();
        for (mv, rv) in m.values().iter().zip(rho.values()) {
            prop_assert!(*mv <= rv + 1e-12);
        }
    }

    #[test]
    fn real_orbitals_carry_no_current(seed in any::<u64>()) {
        let cell = small_cell(5.0);
        let mut r = rng(seed);
        let up = band_scalar(&cell, 2, &mut r);
        let down = band_scalar(&cell, 2, &mut r);
        let lift = |f: &ScalarField| f.values().iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>();
        let phi = SpinorField::from_components(cell, lift(&up), lift(&down)).unwrap();
        let gamma = DensityMatrix::new(orthonormalise(vec![phi]), vec![1.0], BoundaryMode::Periodic).unwrap();
        prop_assert!(current(&gamma).max_abs() < 1e-12);
    }

    #[test]
    fn fermi_fill_conserves_electrons(seed in any::<u64>(), electrons in 0.1f64..40.0) {
        let mut r = rng(seed);
        let mut levels: Vec<f64> = (0..50).map(|_| rand::Rng::gen_range(&mut r, -3.0..3.0)).collect();
        levels.sort_by(f64::total_cmp);
        let f = fermi_fill(&levels, electrons, 1e-9).unwrap();
        prop_assert!((f.occupations.iter().sum::<f64>() - electrons).abs() < 1e-12);
        prop_assert!(f.occupations.iter().all(|o| (0.0..=1.0).contains(o)));
        prop_assert!(f.occupations.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tf_energy_is_convex(a1 in 0.01f64..2.0, b1 in 0.2f64..5.0, a2 in 0.01f64..2.0, b2 in 0.2f64..5.0, t in 0.0f64..1.0) {
        let grid = RadialGrid::new(1e-8, 1e3, 1200).unwrap();
        let r1 = grid.sample(|r| a1 * (-r / b1).exp());
        let r2 = grid.sample(|r| a2 * (-r * r / b2).exp());
        let mix: Vec<f64> = r1.iter().zip(&r2).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        let e = |v: Vec<f64>| tf_energy(&TFDensity::new(grid.clone(), v).unwrap()).total;
        let lhs = e(mix);
        let rhs = (1.0 - t) * e(r1) + t * e(r2);
        prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn tf_terms_scale(a in 0.1f64..10.0, m in -200i64..200) {
        let count = 2001;
        let grid = RadialGrid::new(1e-6, 1e6, count).unwrap();
        let dt = (1e12f64).ln() / (count - 1) as f64;
        let b = (m as f64 * dt).exp();
        let t = grid.sample(|r| r.ln());
        let base: Vec<f64> = t.iter().map(|t| (-(t * t)).exp()).collect();
        // ρ_ab(r_i) = a b³ ρ(b r_i) = a b³ ρ(r_{i+m})
        let scaled: Vec<f64> = (0..count as i64)
            .map(|i| {
                let j = i + m;
                if (0..count as i64).contains(&j) { a * b.powi(3) * base[j as usize] } else { 0.0 }
            })
            .collect();
        let e0 = tf_energy(&TFDensity::new(grid.clone(), base).unwrap());
        let e1 = tf_energy(&TFDensity::new(grid, scaled).unwrap());
        prop_assert!(rel(e1.kinetic, a.powf(5.0 / 3.0) * b * b * e0.kinetic) < 1e-10);
        prop_assert!(rel(e1.hartree, a * a * b * e0.hartree) < 1e-10);
        prop_assert!(rel(e1.attraction, a * b * e0.attraction) < 1e-10);
    }

    #[test]
    fn zero_mode_family_scaling(lambda in 0.01f64..100.0, z in 0.1f64..20.0, alpha in 0.001f64..1.0, eps in 0.0f64..1.0) {
        let fam = loss_yau([0.0, 0.0, 1.0]).unwrap().with_epsilon(eps).unwrap();
        let d = dilate(&fam, lambda).unwrap();
        let (t0, t1) = (fam.terms(z, alpha), d.terms(z, alpha));
        prop_assert_eq!(t1.kinetic, lambda * lambda * t0.kinetic);
        prop_assert!(rel(t1.attraction, lambda * t0.attraction) < 1e-12 || t0.attraction == 0.0);
        prop_assert!(rel(t1.hartree, lambda * t0.hartree) < 1e-12 || t0.hartree == 0.0);
        prop_assert!(rel(t1.field, lambda * t0.field) < 1e-12);
        prop_assert_eq!(d.trace(), fam.trace());
        let (f0, f1) = (f_z(&fam, z).unwrap(), f_z(&d, z).unwrap());
        prop_assert!((f0 - f1).abs() < 1e-15);
    }

    #[test]
    fn penalty_vanishes_on_zero_modes(lambda in 0.0f64..1e3, dil in 0.1f64..10.0, z in 0.1f64..10.0) {
        let fam = dilate(&loss_yau([1.0, 0.0, 0.0]).unwrap(), dil).unwrap();
        let v = penalised_f(PenalisedInput::Family(&fam), z, lambda).unwrap();
        prop_assert_eq!(v.value, f_z(&fam, z).unwrap());
    }

    #[test]
    fn config_roundtrip(
        seed in any::<u64>(),
        length in 1.0f64..50.0,
        points in 2usize..40,
        alpha in 1e-4f64..1.0,
        charge in 0.1f64..10.0,
        mixing in 0.01f64..1.0,
        tol in 1e-12f64..1e-2,
        periodic in any::<bool>(),
        width in proptest::option::of(0.0f64..2.0),
    ) {
        let mut c = RunConfig { seed, ..Default::default() };
        c.scf.density_mixing = mixing;
        c.scf.tolerance = tol;
        c.scan.alpha = Some(alpha);
        c.system = Some(magrhf_core::io::config::SystemConfig {
            nuclei: vec![Nucleus { charge, position: [0.3 * length; 3] }],
            cell: magrhf_core::io::config::CellConfig { length, points: 2 * points },
            mode: if periodic { BoundaryMode::Periodic } else { BoundaryMode::Molecular },
            electrons: charge,
            alpha,
            nucleus_width: width,
        });
        let text = c.to_toml().unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn checkpoint_roundtrip(seed in any::<u64>(), rank in 1usize..4, periodic in any::<bool>()) {
        let cell = Cell::new(3.5, 4).unwrap();
        let mut r = rng(seed);
        let ck = Checkpoint {
            cell,
            mode: if periodic { BoundaryMode::Periodic } else { BoundaryMode::Molecular },
            orbitals: (0..rank).map(|_| random_spinor(&cell, &mut r)).collect(),
            occupations: (0..rank).map(|_| rand::Rng::gen_range(&mut r, 0.0..1.0)).collect(),
            a: band_vector(&cell, 1, &mut r),
        };
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &ck);
        prop_assert_eq!(back.to_bytes(), bytes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn gauge_covariance(amp in -1.0f64..1.0, fx in 1i64..3, fy in 0i64..3, shift in 0.0f64..0.5) {
        let cell = Cell::new(10.0, 64).unwrap();
        let q = 2.0 * PI / cell.length();
        let centre = [5.0 + shift, 5.0, 5.0 - shift];
        let psi = SpinorField::from_fn(cell, |x| {
            let d = cell.displacement(x, centre);
            let g = (-1.5 * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])).exp();
            [C64::new(g, 0.3 * d[0] * g), C64::new(0.5 * d[2] * g, -0.2 * g)]
        });
        let a = MagneticPotential::new(VectorField::from_fn(cell, |x| [0.4 * (q * x[1]).sin(), 0.2 * (q * x[2]).cos(), 0.3 * (q * x[0]).sin()]), false);
        let mu = ScalarField::from_fn(cell, |x| amp * ((fx as f64) * q * x[0] + (fy as f64) * q * x[1]).sin());
        let a2 = MagneticPotential::unprojected(a.a().add(&gradient(&mu)).unwrap());
        let psi2 = psi.phase_multiplied(&mu.scaled(-1.0));
        let k1 = apply_pauli_kinetic(&psi, &a).unwrap().phase_multiplied(&mu.scaled(-1.0));
        let k2 = apply_pauli_kinetic(&psi2, &a2).unwrap();
        let err = k2.sub(&k1).unwrap().norm() / k1.norm();
        prop_assert!(err < 1e-9, "relative error {err}");
        prop_assert!(a2.b().sub(a.b()).unwrap().max_abs() < 1e-12);
    }
}
