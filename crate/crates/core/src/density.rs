//! Finite-rank one-body density matrices `γ = Σ n_k |φ_k⟩⟨φ_k|`, their
//! observables (density, current, magnetisation), the energy functional and
//! the kinetic-energy inequality checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{gradient, Cell, Fft3, ScalarField, SpinorField, VectorField, C64};
use crate::parallel;
use crate::pauli::{hartree, magnetic_energy, pauli_kinetic_unchecked, BoundaryMode, MagneticPotential, SystemSpec};
use crate::pauli::external_potential;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Occupied spinor orbitals with occupation numbers in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    cell: Cell,
    orbitals: Vec<SpinorField>,
    occupations: Vec<f64>,
    mode: BoundaryMode,
}

impl DensityMatrix {
    pub fn new(orbitals: Vec<SpinorField>, occupations: Vec<f64>, mode: BoundaryMode) -> Result<Self> {
        if orbitals.is_empty() {
            return Err(Error::invalid("density matrix needs at least one orbital"));
        }
        if orbitals.len() != occupations.len() {
            return Err(Error::invalid(format!(
                "{} orbitals but {} occupations",
                orbitals.len(),
                occupations.len()
            )));
        }
        let cell = *orbitals[0].cell();
        for o in &orbitals {
            cell.ensure_same(o.cell())?;
        }
        for (k, &n) in occupations.iter().enumerate() {
            if !(0.0..=1.0).contains(&n) {
                return Err(Error::invalid(format!("occupation {k} = {n} outside [0, 1]")));
            }
        }
        for i in 0..orbitals.len() {
            for j in 0..=i {
                let s = orbitals[i].inner_unchecked(&orbitals[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (s - C64::new(target, 0.0)).norm() > ORTHONORMAL_TOL {
                    return Err(Error::invalid(format!(
                        "orbitals not orthonormal: <{i},{j}> = {s:.3e}"
                    )));
                }
            }
        }
        Ok(Self {
            cell,
            orbitals,
            occupations,
            mode,
        })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn orbitals(&self) -> &[SpinorField] {
        &self.orbitals
    }

    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn rank(&self) -> usize {
        self.orbitals.len()
    }

    /// `Tr γ = Σ n_k` (per unit cell in periodic mode).
    pub fn trace(&self) -> f64 {
        self.occupations.iter().sum()
    }

    /// Orbitals with nonzero occupation, paired with their occupation.
    pub fn occupied(&self) -> impl Iterator<Item = (&SpinorField, f64)> {
        self.orbitals
            .iter()
            .zip(self.occupations.iter().copied())
            .filter(|(_, n)| *n > 0.0)
    }

    pub fn into_parts(self) -> (Vec<SpinorField>, Vec<f64>) {
        (self.orbitals, self.occupations)
    }
}

/// `ρ_γ`, `j_γ` and `m_γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub rho: ScalarField,
    pub current: VectorField,
    pub magnetisation: VectorField,
}

impl Observables {
    pub fn compute(gamma: &DensityMatrix) -> Self {
        let cell = *gamma.cell();
        let occupied: Vec<(&SpinorField, f64)> = gamma.occupied().collect();
        let parts = parallel::map(&occupied, |(phi, n)| orbital_observables(phi, *n));
        let mut rho = vec![0.0; cell.len()];
        let mut j = [vec![0.0; cell.len()], vec![0.0; cell.len()], vec![0.0; cell.len()]];
        let mut m = [vec![0.0; cell.len()], vec![0.0; cell.len()], vec![0.0; cell.len()]];
        for (r, jj, mm) in parts {
            add_into(&mut rho, &r);
            for a in 0..3 {
                add_into(&mut j[a], &jj[a]);
                add_into(&mut m[a], &mm[a]);
            }
        }
        let vf = |c: [Vec<f64>; 3]| {
            let [x, y, z] = c;
            VectorField::from_components([
                ScalarField::from_values(cell, x).expect("length"),
                ScalarField::from_values(cell, y).expect("length"),
                ScalarField::from_values(cell, z).expect("length"),
            ])
            .expect("same cell")
        };
        Self {
            rho: ScalarField::from_values(cell, rho).expect("length"),
            current: vf(j),
            magnetisation: vf(m),
        }
    }

    /// Gauge-invariant current `½j + Aρ` entering the continuity equation.
    pub fn physical_current(&self, a: &MagneticPotential) -> Result<VectorField> {
        self.current.scaled(0.5).add(&a.a().mul_scalar_field(&self.rho)?)
    }

    /// Largest violation of `|m| ≤ ρ`, i.e. `max(|m| - ρ)`.
    pub fn magnetisation_excess(&self) -> f64 {
        let mag = self.magnetisation.magnitude();
        mag.values()
            .iter()
            .zip(self.rho.values())
            .map(|(m, r)| m - r)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

type OrbitalParts = (Vec<f64>, [Vec<f64>; 3], [Vec<f64>; 3]);

fn orbital_observables(phi: &SpinorField, n: f64) -> OrbitalParts {
    let cell = *phi.cell();
    let len = cell.len();
    let mut rho = vec![0.0; len];
    let mut m = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for idx in 0..len {
        let [u, d] = phi.at(idx);
        rho[idx] = n * (u.norm_sqr() + d.norm_sqr());
        let ud = u.conj() * d;
        m[0][idx] = n * 2.0 * ud.re;
        m[1][idx] = n * 2.0 * ud.im;
        m[2][idx] = n * (u.norm_sqr() - d.norm_sqr());
    }
    let j = orbital_current(phi, n);
    (rho, j, m)
}

/// `n · 2 Re Σ_s conj(φ_s) p φ_s` (equal to `n · 2 Im Σ_s conj(φ_s)∇φ_s`).
fn orbital_current(phi: &SpinorField, n: f64) -> [Vec<f64>; 3] {
    let cell = *phi.cell();
    let fft = Fft3::for_points(cell.points());
    let k = cell.wavenumbers();
    let mut j = [vec![0.0; cell.len()], vec![0.0; cell.len()], vec![0.0; cell.len()]];
    for s in 0..2 {
        let comp = phi.component(s);
        let mut hat = comp.to_vec();
        fft.forward(&mut hat);
        for (a, ja) in j.iter_mut().enumerate() {
            let mut buf = hat.clone();
            for (idx, v) in buf.iter_mut().enumerate() {
                *v *= k[cell.unravel(idx)[a]];
            }
            fft.inverse(&mut buf);
            for ((acc, p), f) in ja.iter_mut().zip(&buf).zip(comp) {
                *acc += n * 2.0 * (f.conj() * p).re;
            }
        }
    }
    j
}

pub fn density(gamma: &DensityMatrix) -> ScalarField {
    let cell = *gamma.cell();
    let mut rho = vec![0.0; cell.len()];
    for (phi, n) in gamma.occupied() {
        for (idx, r) in rho.iter_mut().enumerate() {
            let [u, d] = phi.at(idx);
            *r += n * (u.norm_sqr() + d.norm_sqr());
        }
    }
    ScalarField::from_values(cell, rho).expect("length")
}

pub fn current(gamma: &DensityMatrix) -> VectorField {
    let cell = *gamma.cell();
    let mut j = [vec![0.0; cell.len()], vec![0.0; cell.len()], vec![0.0; cell.len()]];
    for (phi, n) in gamma.occupied() {
        let o = orbital_current(phi, n);
        for a in 0..3 {
            add_into(&mut j[a], &o[a]);
        }
    }
    let [x, y, z] = j;
    VectorField::from_components([
        ScalarField::from_values(cell, x).expect("length"),
        ScalarField::from_values(cell, y).expect("length"),
        ScalarField::from_values(cell, z).expect("length"),
    ])
    .expect("same cell")
}

pub fn magnetisation(gamma: &DensityMatrix) -> VectorField {
    Observables::compute(gamma).magnetisation
}

/// Individual energy terms and their sum (hartree).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub external: f64,
    pub hartree: f64,
    pub magnetic: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic: f64, external: f64, hartree: f64, magnetic: f64) -> Self {
        Self {
            kinetic,
            external,
            hartree,
            magnetic,
            total: kinetic + external + hartree + magnetic,
        }
    }
}

/// `½ Σ n_k ⟨φ_k, [σ·(p+A)]² φ_k⟩`.
pub fn pauli_kinetic_energy(gamma: &DensityMatrix, a: &MagneticPotential) -> Result<f64> {
    gamma.cell().ensure_same(a.cell())?;
    let occ: Vec<(&SpinorField, f64)> = gamma.occupied().collect();
    let terms = parallel::map(&occ, |(phi, n)| {
        n * phi.inner_unchecked(&pauli_kinetic_unchecked(phi, a)).re
    });
    Ok(terms.iter().sum())
}

/// Energy terms given precomputed `V` and `ρ`.
pub(crate) fn energy_with(
    gamma: &DensityMatrix,
    a: &MagneticPotential,
    v_ext: &ScalarField,
    rho: &ScalarField,
    alpha: f64,
) -> Result<EnergyBreakdown> {
    let kinetic = pauli_kinetic_energy(gamma, a)?;
    let external = v_ext.inner(rho)?;
    let (_, hartree_energy) = hartree(rho);
    let magnetic = magnetic_energy(a, alpha)?;
    Ok(EnergyBreakdown::new(kinetic, external, hartree_energy, magnetic))
}

/// Kinetic, nuclear, Hartree and magnetic energies (per cell in periodic
/// mode).
pub fn total_energy(gamma: &DensityMatrix, a: &MagneticPotential, spec: &SystemSpec) -> Result<EnergyBreakdown> {
    gamma.cell().ensure_same(spec.cell())?;
    a.cell().ensure_same(spec.cell())?;
    let v = external_potential(spec);
    let rho = density(gamma);
    energy_with(gamma, a, &v, &rho, spec.alpha())
}

/// `Tr((p+A)²γ) = Σ n_k ‖(p+A)φ_k‖²`.
pub fn covariant_kinetic(gamma: &DensityMatrix, a: &MagneticPotential) -> Result<f64> {
    gamma.cell().ensure_same(a.cell())?;
    let occ: Vec<(&SpinorField, f64)> = gamma.occupied().collect();
    let terms = parallel::map(&occ, |(phi, n)| n * covariant_norm_sqr(phi, a));
    Ok(terms.iter().sum())
}

fn covariant_norm_sqr(phi: &SpinorField, a: &MagneticPotential) -> f64 {
    let cell = *phi.cell();
    let fft = Fft3::for_points(cell.points());
    let k = cell.wavenumbers();
    let av = a.a().components();
    let mut total = 0.0;
    for s in 0..2 {
        let comp = phi.component(s);
        let mut hat = comp.to_vec();
        fft.forward(&mut hat);
        for ax in 0..3 {
            let mut buf = hat.clone();
            for (idx, v) in buf.iter_mut().enumerate() {
                *v *= k[cell.unravel(idx)[ax]];
            }
            fft.inverse(&mut buf);
            total += buf
                .iter()
                .zip(comp)
                .zip(av[ax].values())
                .map(|((p, f), w)| (p + f * w).norm_sqr())
                .sum::<f64>();
        }
    }
    total * cell.dv()
}

/// Constants of the kinetic-energy inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalityConstants {
    /// Lieb–Thirring constant for two spin states.
    pub c_lt: f64,
    /// Sobolev constant `S₃` in `∫|∇f|² ≥ S₃ ‖f‖₆²`.
    pub sobolev: f64,
    /// Constant of the `L²` bound `C₂ (∫ρ²)^{2/3} ≤ Tr((p+A)²γ)`.
    pub c2: f64,
}

impl Default for InequalityConstants {
    fn default() -> Self {
        let c_lt = 0.6 * (3.0 * PI * PI).powf(2.0 / 3.0);
        let sobolev = 3.0 * (PI / 2.0).powf(4.0 / 3.0);
        Self {
            c_lt,
            sobolev,
            c2: (c_lt * sobolev).sqrt(),
        }
    }
}

impl InequalityConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_lt", self.c_lt), ("sobolev", self.sobolev), ("c2", self.c2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Left- and right-hand sides of the three kinetic inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// `Tr((p+A)²γ)`.
    pub kinetic: f64,
    /// `C_LT ∫ρ^{5/3}`.
    pub lieb_thirring: f64,
    /// `∫|∇√ρ|²`.
    pub hoffmann_ostenhof: f64,
    /// `C₂ (∫ρ²)^{2/3}`.
    pub l2_sobolev: f64,
}

impl InequalityReport {
    pub fn lieb_thirring_holds(&self) -> bool {
        self.lieb_thirring <= self.kinetic
    }

    pub fn hoffmann_ostenhof_holds(&self) -> bool {
        self.hoffmann_ostenhof <= self.kinetic
    }

    pub fn l2_holds(&self) -> bool {
        self.l2_sobolev <= self.kinetic
    }

    pub fn all_hold(&self) -> bool {
        self.lieb_thirring_holds() && self.hoffmann_ostenhof_holds() && self.l2_holds()
    }

    pub fn violations(&self) -> usize {
        [self.lieb_thirring_holds(), self.hoffmann_ostenhof_holds(), self.l2_holds()]
            .iter()
            .filter(|ok| !**ok)
            .count()
    }
}

/// Evaluates the Lieb–Thirring, Hoffmann-Ostenhof and `L²` bounds.
pub fn check_kinetic_inequalities(
    gamma: &DensityMatrix,
    a: &MagneticPotential,
    constants: &InequalityConstants,
) -> Result<InequalityReport> {
    let kinetic = covariant_kinetic(gamma, a)?;
    let rho = density(gamma);
    Ok(inequality_sides(kinetic, &rho, constants))
}

pub(crate) fn inequality_sides(kinetic: f64, rho: &ScalarField, constants: &InequalityConstants) -> InequalityReport {
    let rho = rho.map(|r| r.max(0.0));
    let int53 = rho.map(|r| r.powf(5.0 / 3.0)).integral();
    let int2 = rho.map(|r| r * r).integral();
    let reg = 1e-14 * rho.max_abs();
    let sqrt_rho = rho.map(|r| (r + reg).sqrt());
    let ho = gradient(&sqrt_rho).square_integral();
    InequalityReport {
        kinetic,
        lieb_thirring: constants.c_lt * int53,
        hoffmann_ostenhof: ho,
        l2_sobolev: constants.c2 * int2.powf(2.0 / 3.0),
    }
}
