mod common;

use std::f64::consts::PI;

use magrhf_core::density::{current, pauli_kinetic_energy, DensityMatrix};
use magrhf_core::pauli::{
    apply_pauli_kinetic, external_potential, hartree, periodic_green_ewald, BoundaryMode, MagneticPotential, Nucleus,
    SystemSpec,
};
use magrhf_core::scf::{eigensolve, fermi_fill, update_vector_potential, EigenOptions, MeanFieldHamiltonian};
use magrhf_core::tf::{tf_energy, RadialGrid, TFDensity};
use magrhf_core::{Cell, ScalarField, SpinorField, VectorField, C64};

use common::*;

fn oracle_setup(seed: u64) -> (Cell, MagneticPotential, ScalarField) {
    let cell = Cell::new(3.0, 6).unwrap();
    let mut r = rng(seed);
    let a = MagneticPotential::new(band_vector(&cell, 2, &mut r).scaled(0.5), false);
    let v = ScalarField::from_fn(cell, |x| {
        let d = cell.displacement(x, [1.5; 3]);
        -2.0 * (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])).exp()
    });
    (cell, a, v)
}

#[test]
fn dense_pauli_matches_matrix_free() {
    let (cell, a, v) = oracle_setup(3);
    let h = dense_pauli(&cell, a.a(), a.b(), &ScalarField::zeros(cell));
    let mut r = rng(11);
    for _ in 0..3 {
        let psi = random_spinor(&cell, &mut r);
        let dense = &h * spinor_to_vec(&psi);
        let free = spinor_to_vec(&apply_pauli_kinetic(&psi, &a).unwrap());
        assert!((dense - &free).norm() < 1e-11 * free.norm());
    }
    let hv = dense_pauli(&cell, a.a(), a.b(), &v);
    assert!((&hv - hv.adjoint()).norm() < 1e-12 * hv.norm());
}

#[test]
fn dense_eigenvalues_match_block_solver() {
    let (cell, a, v) = oracle_setup(5);
    let exact = dense_levels(&dense_pauli(&cell, a.a(), a.b(), &v));
    let h = MeanFieldHamiltonian { a: &a, potential: &v };
    let opts = EigenOptions {
        tolerance: 1e-12,
        max_iter: 2000,
        guard: 3,
        seed: 9,
    };
    let res = eigensolve(&cell, |p| h.apply(p), 4, &[], &opts).unwrap();
    for (got, want) in res.levels.iter().zip(&exact) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn current_and_energy_match_dense_sums() {
    let cell = Cell::new(2.5, 4).unwrap();
    let mut r = rng(21);
    let orbitals = orthonormalise((0..2).map(|_| random_spinor(&cell, &mut r)).collect());
    let occ = vec![1.0, 0.4];
    let gamma = DensityMatrix::new(orbitals.clone(), occ.clone(), BoundaryMode::Molecular).unwrap();
    let j = current(&gamma);
    let len = cell.len();
    for ax in 0..3 {
        let p = dense_momentum(&cell, ax);
        let mut want = vec![0.0; len];
        for (phi, n) in orbitals.iter().zip(&occ) {
            for s in 0..2 {
                let fv = nalgebra::DVector::from_column_slice(phi.component(s));
                let pv = &p * &fv;
                for i in 0..len {
                    want[i] += n * 2.0 * (fv[i].conj() * pv[i]).re;
                }
            }
        }
        for (g, w) in j.component(ax).values().iter().zip(&want) {
            assert!((g - w).abs() < 1e-11);
        }
    }
    let a = MagneticPotential::new(band_vector(&cell, 1, &mut r), false);
    let h = dense_pauli(&cell, a.a(), a.b(), &ScalarField::zeros(cell));
    let want: f64 = orbitals
        .iter()
        .zip(&occ)
        .map(|(phi, n)| {
            let v = spinor_to_vec(phi);
            n * (v.adjoint() * &h * &v)[(0, 0)].re * cell.dv()
        })
        .sum();
    let got = pauli_kinetic_energy(&gamma, &a).unwrap();
    assert!(rel(got, want) < 1e-11);
}

#[test]
fn ewald_matches_smeared_series_far_from_charge() {
    let cell = Cell::new(6.0, 8).unwrap();
    let x = [3.0, 2.5, 2.0];
    let s: f64 = 0.25;
    let q = 2.0 * PI / cell.length();
    let mmax = 40i64;
    let mut series = 0.0;
    for a in -mmax..=mmax {
        for b in -mmax..=mmax {
            for c in -mmax..=mmax {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let k = [a as f64 * q, b as f64 * q, c as f64 * q];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                series += 4.0 * PI / (cell.volume() * k2) * (-0.5 * k2 * s * s).exp() * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos();
            }
        }
    }
    // far from the charge, smearing only shifts the quadratic background
    // part of G by 2πs²/|Γ|
    let ewald = periodic_green_ewald(&cell, x, false);
    let shift = 2.0 * PI * s * s / cell.volume();
    assert!((series - ewald - shift).abs() < 1e-9, "{ewald} vs {series}");
}

#[test]
fn ewald_is_mean_free_and_symmetric() {
    let cell = Cell::new(4.0, 8).unwrap();
    let mut sum = 0.0;
    let n = 8;
    for idx in 0..n * n * n {
        let p = cell.position(idx);
        let x = [p[0] + 0.25, p[1] + 0.25, p[2] + 0.25];
        sum += periodic_green_ewald(&cell, x, false);
    }
    // midpoint rule of a mean-zero periodic function with a 1/r singularity
    assert!((sum / (n * n * n) as f64).abs() < 2e-2);
    let a = periodic_green_ewald(&cell, [0.7, 0.2, 1.1], false);
    let b = periodic_green_ewald(&cell, [-0.7, -0.2, -1.1], false);
    let c = periodic_green_ewald(&cell, [0.2, 1.1, 0.7], false);
    assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
}

#[test]
fn nuclear_potential_matches_term_by_term_assembly() {
    let cell = Cell::new(7.0, 12).unwrap();
    let nuclei = vec![
        Nucleus { charge: 1.0, position: [2.0, 3.0, 3.5] },
        Nucleus { charge: 2.0, position: [4.5, 3.0, 3.5] },
    ];
    let spec = SystemSpec::new(cell, nuclei.clone(), BoundaryMode::Molecular, 3.0, 0.02)
        .unwrap()
        .with_nucleus_width(0.4)
        .unwrap();
    let want = nuclear_potential(&cell, &nuclei.iter().map(|n| (n.charge, n.position)).collect::<Vec<_>>(), 0.4);
    let got = external_potential(&spec);
    for (g, w) in got.values().iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn vector_potential_of_single_current_mode() {
    let cell = Cell::new(8.0, 16).unwrap();
    let spec = SystemSpec::new(cell, vec![Nucleus { charge: 1.0, position: [4.0; 3] }], BoundaryMode::Periodic, 1.0, 0.3).unwrap();
    let q = 2.0 * PI / cell.length();
    let j = VectorField::from_fn(cell, |x| [(q * x[1]).sin(), 0.0, 0.0]);
    let zero = VectorField::zeros(cell);
    let a = update_vector_potential(&j, &zero, &ScalarField::zeros(cell), &MagneticPotential::zero(cell), &spec).unwrap();
    let pref = -2.0 * PI * 0.09 / (q * q);
    let want = VectorField::from_fn(cell, |x| [pref * (q * x[1]).sin(), 0.0, 0.0]);
    assert!(a.a().sub(&want).unwrap().max_abs() < 1e-14);
    // a gradient current generates nothing
    let g = VectorField::from_fn(cell, |x| [(q * x[0]).cos(), 0.0, 0.0]);
    let a = update_vector_potential(&g, &zero, &ScalarField::zeros(cell), &MagneticPotential::zero(cell), &spec).unwrap();
    assert!(a.a().max_abs() < 1e-14);
    // a uniform magnetisation has no curl
    let m = VectorField::from_fn(cell, |_| [0.0, 0.0, 1.0]);
    let a = update_vector_potential(&zero, &m, &ScalarField::zeros(cell), &MagneticPotential::zero(cell), &spec).unwrap();
    assert!(a.a().max_abs() < 1e-14);
}

#[test]
fn hartree_energy_of_single_mode() {
    let cell = Cell::new(5.0, 12).unwrap();
    let q = 2.0 * PI / cell.length();
    let rho = ScalarField::from_fn(cell, |x| 1.0 + (q * x[0]).cos());
    let (phi, e) = hartree(&rho);
    let want = PI * cell.volume() / (q * q);
    assert!(rel(e, want) < 1e-13);
    let expect = ScalarField::from_fn(cell, |x| 4.0 * PI / (q * q) * (q * x[0]).cos());
    assert!(phi.sub(&expect).unwrap().max_abs() < 1e-12);
}

#[test]
fn fermi_shell_examples() {
    let f = fermi_fill(&[-1.0, -0.5, -0.5, -0.5, 0.3], 2.0, 1e-9).unwrap();
    for (o, w) in f.occupations.iter().zip([1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) {
        assert!((o - w).abs() < 1e-15);
    }
    assert_eq!(f.shell, 1..4);
    assert_eq!(f.fermi_energy, -0.5);
    let f = fermi_fill(&[-1.0, -1.0, 0.0, 0.0], 2.0, 1e-9).unwrap();
    assert_eq!(f.occupations, vec![1.0, 1.0, 0.0, 0.0]);
    assert_eq!(f.fermi_energy, -0.5);
    let f = fermi_fill(&[-2.0, -1.0, -1.0], 3.0, 1e-9).unwrap();
    assert_eq!(f.occupations, vec![1.0; 3]);
    assert!(f.shell_truncated == false);
}

#[test]
fn hydrogen_density_quadrature() {
    let run = |count| {
        let grid = RadialGrid::new(1e-10, 200.0, count).unwrap();
        tf_energy(&TFDensity::new(grid.clone(), grid.sample(|r| (-2.0 * r).exp() / PI)).unwrap())
    };
    let e = run(6000);
    assert!((e.attraction + 1.0).abs() < 1e-9);
    let k = 8.0 * PI.powf(-2.0 / 3.0) * 27.0 / 1000.0;
    assert!((e.kinetic - k).abs() < 1e-9);
    // the kink of 1/max(r, r') makes the Hartree term second order in the
    // log spacing
    let err = |e: f64| e - 5.0 / 16.0;
    assert!(err(e.hartree).abs() < 1e-6);
    let ratio = err(run(3000).hartree) / err(e.hartree);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn sampled_spinor_inner_products() {
    let cell = Cell::new(10.0, 32).unwrap();
    let psi = SpinorField::from_fn(cell, |x| {
        let d = cell.displacement(x, [5.0; 3]);
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        [C64::new((-r2).exp(), 0.0), C64::new(0.0, (-r2).exp())]
    });
    // ∫ 2 e^{-2r²} = 2 (π/2)^{3/2}
    assert!(rel(psi.norm_sqr(), 2.0 * (PI / 2.0).powf(1.5)) < 1e-12, "{}", psi.norm_sqr() / (2.0 * (PI / 2.0).powf(1.5)) - 1.0);
}
