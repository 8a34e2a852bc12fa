//! Self-consistent solution of the magnetic rHF Euler–Lagrange system:
//! eigensolve, Fermi filling, vector-potential update, mixing with step
//! control, residual reporting and α-scans.

pub mod eigen;
pub mod fermi;
pub mod mixing;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use eigen::{eigensolve, EigenOptions, EigenResult};
pub use fermi::{fermi_fill, Filling};
pub use mixing::AndersonMixer;

use crate::density::{energy_with, inequality_sides, covariant_kinetic, DensityMatrix, EnergyBreakdown, InequalityConstants, InequalityReport, Observables};
use crate::error::{Error, Result};
use crate::fields::{curl, divergence, forward_real, project_coefficients, Cell, ScalarField, SpinorField, VectorField, C64};
use crate::pauli::{external_potential, hartree, pauli_kinetic_unchecked, BoundaryMode, MagneticPotential, SystemSpec};

/// Knobs of the SCF loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScfConfig {
    pub max_iter: usize,
    /// Damping `θ_ρ ∈ (0, 1]` of the density update.
    pub density_mixing: f64,
    /// Damping `θ_A ∈ (0, 1]` of the vector-potential update.
    pub potential_mixing: f64,
    /// Convergence threshold for the orbital, A-equation and continuity
    /// residuals.
    pub tolerance: f64,
    pub eigen_tolerance: f64,
    pub eigen_max_iter: usize,
    /// Levels computed beyond `⌈N⌉`, used to detect the Fermi shell.
    pub extra_states: usize,
    /// Unconverged guard vectors of the block eigensolver.
    pub guard_states: usize,
    /// Levels closer than this to the highest occupied level form the shell.
    pub degeneracy_threshold: f64,
    /// Anderson history length; `0` means plain linear mixing.
    pub anderson_depth: usize,
    /// Passes over the lagged `Aρ` term of the A-equation.
    pub lag_iterations: usize,
    /// Total energies below this value are reported as a divergence.
    pub energy_floor: f64,
    pub step_halvings: usize,
    /// Relative energy increase tolerated before a step is retried.
    pub energy_slack: f64,
    /// Keep `A ≡ 0` (the α → 0 limit).
    pub pin_vector_potential: bool,
    /// Start from the field generated by a spin-up magnetisation of the
    /// initial density instead of `A = 0`.
    pub polarize_initial: bool,
    pub inequality_checks: bool,
    /// Constants of the per-iterate inequality checks; set from the run
    /// configuration.
    #[serde(skip)]
    pub constants: InequalityConstants,
    /// Eigensolver seed; set from the run configuration.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            density_mixing: 0.6,
            potential_mixing: 0.6,
            tolerance: 1e-6,
            eigen_tolerance: 1e-8,
            eigen_max_iter: 400,
            extra_states: 2,
            guard_states: 2,
            degeneracy_threshold: 1e-8,
            anderson_depth: 6,
            lag_iterations: 2,
            energy_floor: -1e4,
            step_halvings: 8,
            energy_slack: 1e-10,
            pin_vector_potential: false,
            polarize_initial: true,
            inequality_checks: true,
            constants: InequalityConstants::default(),
            seed: 0,
        }
    }
}

impl ScfConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerance", self.tolerance),
            ("eigen_tolerance", self.eigen_tolerance),
            ("energy_slack", self.energy_slack),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("scf.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("density_mixing", self.density_mixing), ("potential_mixing", self.potential_mixing)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("scf.{name} must lie in (0, 1], got {v}")));
            }
        }
        if !(self.degeneracy_threshold >= 0.0) {
            return Err(Error::invalid("scf.degeneracy_threshold must be >= 0"));
        }
        if self.max_iter == 0 || self.eigen_max_iter == 0 {
            return Err(Error::invalid("scf iteration limits must be positive"));
        }
        if self.energy_floor.is_nan() {
            return Err(Error::invalid("scf.energy_floor must be a number"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScfStatus {
    Converged,
    NotConverged,
    Diverged,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScfResiduals {
    /// `max_k ‖H φ_k - ⟨φ_k, H φ_k⟩ φ_k‖` over occupied orbitals, with `H`
    /// built from the output state.
    pub orbital: f64,
    /// Relative residual of the A-equation at the output state.
    pub vector_potential: f64,
    /// `‖div(½j + Aρ)‖ / ‖½j + Aρ‖`; absolute when the current vanishes or
    /// `A` is pinned.
    pub continuity: f64,
    /// `‖ρ_out - ρ_in‖`.
    pub density: f64,
}

impl ScfResiduals {
    pub fn max(&self) -> f64 {
        self.orbital.max(self.vector_potential).max(self.continuity)
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Result of an SCF run.
#[derive(Clone, Debug)]
pub struct ScfState {
    pub gamma: DensityMatrix,
    pub a: MagneticPotential,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub residuals: ScfResiduals,
    pub fermi_energy: f64,
    pub levels: Vec<f64>,
    pub status: ScfStatus,
    /// Total energy of every accepted iterate.
    pub energy_history: Vec<f64>,
    /// Inequality sides at every accepted iterate.
    pub inequality_reports: Vec<InequalityReport>,
    pub flags: Vec<String>,
    guard_vectors: Vec<SpinorField>,
}

impl ScfState {
    pub fn converged(&self) -> bool {
        self.status == ScfStatus::Converged
    }

    pub fn inequality_violations(&self) -> usize {
        self.inequality_reports.iter().map(|r| r.violations()).sum()
    }

    /// Starting point for another run (e.g. the next α of a scan).
    pub fn warm_start(&self) -> WarmStart {
        WarmStart {
            gamma: self.gamma.clone(),
            a: self.a.clone(),
            guard_vectors: self.guard_vectors.clone(),
        }
    }
}

/// Orbitals and vector potential from which an SCF run starts.
#[derive(Clone, Debug)]
pub struct WarmStart {
    pub gamma: DensityMatrix,
    pub a: MagneticPotential,
    pub guard_vectors: Vec<SpinorField>,
}

impl WarmStart {
    pub fn new(gamma: DensityMatrix, a: MagneticPotential) -> Self {
        Self {
            gamma,
            a,
            guard_vectors: Vec::new(),
        }
    }
}

/// Spectral solution of the A-equation with lagged `Aρ`:
/// `Â_k = -4πα² P⊥[½(ĵ + curl m̂) + (A_in ρ)^]_k / |k|²`, `Â_0 = 0`.
pub fn update_vector_potential(
    j: &VectorField,
    m: &VectorField,
    rho: &ScalarField,
    a_in: &MagneticPotential,
    spec: &SystemSpec,
) -> Result<MagneticPotential> {
    let cell = *spec.cell();
    for c in [j.cell(), m.cell(), rho.cell(), a_in.cell()] {
        cell.ensure_same(c)?;
    }
    let source = j
        .add(&curl(m))?
        .scaled(0.5)
        .add(&a_in.a().mul_scalar_field(rho)?)?;
    let mut c = [
        forward_real(&cell, source.component(0).values()),
        forward_real(&cell, source.component(1).values()),
        forward_real(&cell, source.component(2).values()),
    ];
    project_coefficients(&cell, &mut c, true);
    let k2 = cell.k_squared();
    let pref = -4.0 * PI * spec.alpha() * spec.alpha();
    for comp in c.iter_mut() {
        comp[0] = C64::new(0.0, 0.0);
        for idx in 1..cell.len() {
            comp[idx] = if cell.is_nyquist(idx) {
                C64::new(0.0, 0.0)
            } else {
                comp[idx] * (pref / k2[idx])
            };
        }
    }
    Ok(MagneticPotential::from_projected(VectorField::from_fourier(cell, c)?))
}

/// `H = ½[σ·(p+A)]² + V_eff` for fixed `A` and effective potential.
pub struct MeanFieldHamiltonian<'a> {
    pub a: &'a MagneticPotential,
    pub potential: &'a ScalarField,
}

impl MeanFieldHamiltonian<'_> {
    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        let mut out = pauli_kinetic_unchecked(psi, self.a);
        let v = self.potential.values();
        for s in 0..2 {
            let src = psi.component(s);
            for ((o, p), w) in out.component_mut(s).iter_mut().zip(src).zip(v) {
                *o += p * w;
            }
        }
        out
    }
}

/// Superposed normalised Gaussians of width `2/z_j + s_nuc`, one per
/// nucleus, carrying `N` electrons in proportion to the nuclear charges.
pub fn initial_density(spec: &SystemSpec) -> ScalarField {
    let cell = *spec.cell();
    let z_tot = spec.total_charge();
    let mut rho = ScalarField::zeros(cell);
    for nuc in spec.nuclei() {
        let s = 2.0 / nuc.charge + spec.nucleus_width();
        let weight = spec.electrons() * nuc.charge / z_tot;
        let g = ScalarField::from_fn(cell, |x| {
            let d = cell.displacement(x, nuc.position);
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            (-0.5 * r2 / (s * s)).exp()
        });
        let norm = g.integral();
        rho = rho.add(&g.scaled(weight / norm)).expect("same cell");
    }
    rho
}

struct Evaluation {
    gamma: DensityMatrix,
    obs: Observables,
    a_out: MagneticPotential,
    energy: EnergyBreakdown,
    filling: Filling,
    levels: Vec<f64>,
    guard_vectors: Vec<SpinorField>,
}

struct Solver<'a> {
    spec: &'a SystemSpec,
    cfg: &'a ScfConfig,
    v_ext: ScalarField,
    count: usize,
    flags: Vec<String>,
}

impl Solver<'_> {
    fn flag(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.flags.contains(&msg) {
            log::warn!("scf: {msg}");
            self.flags.push(msg);
        }
    }

    fn evaluate(&mut self, rho_in: &ScalarField, a_in: &MagneticPotential, block: &[SpinorField], seed: u64) -> Result<Evaluation> {
        let cell = *self.spec.cell();
        let (phi_h, _) = hartree(rho_in);
        let veff = self.v_ext.add(&phi_h)?;
        let h = MeanFieldHamiltonian {
            a: a_in,
            potential: &veff,
        };
        let opts = EigenOptions {
            tolerance: self.cfg.eigen_tolerance,
            max_iter: self.cfg.eigen_max_iter,
            guard: self.cfg.guard_states,
            seed,
        };
        let res = match eigensolve(&cell, |p| h.apply(p), self.count, block, &opts) {
            Ok(r) => r,
            Err(Error::EigenNotConverged { best, max_residual, .. }) => {
                self.flag(format!("eigensolver stopped at residual {max_residual:.2e}"));
                *best
            }
            Err(e) => return Err(e),
        };
        let filling = fermi_fill(&res.levels, self.spec.electrons(), self.cfg.degeneracy_threshold)?;
        if filling.shell_truncated {
            self.flag("Fermi shell reaches the highest computed level; raise scf.extra_states");
        }
        let gamma = DensityMatrix::new(res.orbitals, filling.occupations.clone(), self.spec.mode())?;
        let obs = Observables::compute(&gamma);
        let a_out = if self.cfg.pin_vector_potential {
            MagneticPotential::zero(cell)
        } else {
            let mut a = a_in.clone();
            for _ in 0..self.cfg.lag_iterations.max(1) {
                a = update_vector_potential(&obs.current, &obs.magnetisation, &obs.rho, &a, self.spec)?;
            }
            a
        };
        let energy = energy_with(&gamma, &a_out, &self.v_ext, &obs.rho, self.spec.alpha())?;
        Ok(Evaluation {
            gamma,
            obs,
            a_out,
            energy,
            filling,
            levels: res.levels,
            guard_vectors: res.guard_vectors,
        })
    }

    fn residuals(&self, ev: &Evaluation, rho_in: &ScalarField) -> Result<ScfResiduals> {
        let (phi_h, _) = hartree(&ev.obs.rho);
        let veff = self.v_ext.add(&phi_h)?;
        let h = MeanFieldHamiltonian {
            a: &ev.a_out,
            potential: &veff,
        };
        let mut orbital: f64 = 0.0;
        for (phi, _) in ev.gamma.occupied() {
            let mut hp = h.apply(phi);
            let lam = phi.inner_unchecked(&hp).re;
            hp.axpy(C64::new(-lam, 0.0), phi);
            orbital = orbital.max(hp.norm());
        }

        let vector_potential = if self.cfg.pin_vector_potential {
            0.0
        } else {
            let re = update_vector_potential(&ev.obs.current, &ev.obs.magnetisation, &ev.obs.rho, &ev.a_out, self.spec)?;
            let diff = re.a().sub(ev.a_out.a())?.norm();
            let norm = ev.a_out.a().norm();
            if norm > 1e-14 {
                diff / norm
            } else {
                diff
            }
        };

        let current = ev.obs.physical_current(&ev.a_out)?;
        let jn = current.norm();
        let dn = divergence(&current).norm();
        let continuity = if jn > 1e-10 && !self.cfg.pin_vector_potential { dn / jn } else { dn };

        let density = ev.obs.rho.sub(rho_in)?.norm();
        Ok(ScfResiduals {
            orbital,
            vector_potential,
            continuity,
            density,
        })
    }
}

fn pack(rho: &ScalarField, a: &MagneticPotential) -> Vec<f64> {
    let mut v = rho.values().to_vec();
    for c in a.a().components() {
        v.extend_from_slice(c.values());
    }
    v
}

fn unpack(cell: Cell, x: &[f64], pinned: bool) -> Result<(ScalarField, MagneticPotential)> {
    let n = cell.len();
    let rho = ScalarField::from_values(cell, x[..n].to_vec())?;
    if pinned {
        return Ok((rho, MagneticPotential::zero(cell)));
    }
    let comps = [0, 1, 2].map(|a| ScalarField::from_values(cell, x[(a + 1) * n..(a + 2) * n].to_vec()).expect("length"));
    let a = VectorField::from_components(comps)?;
    Ok((rho, MagneticPotential::from_projected(a)))
}

/// Runs the SCF loop from the default initial guess.
pub fn scf_solve(spec: &SystemSpec, config: &ScfConfig) -> Result<ScfState> {
    scf_solve_from(spec, config, None)
}

/// Runs the SCF loop, optionally warm-started from a previous state.
pub fn scf_solve_from(spec: &SystemSpec, config: &ScfConfig, warm: Option<&WarmStart>) -> Result<ScfState> {
    config.validate()?;
    spec.validate()?;
    let cell = *spec.cell();
    let count = spec.electrons().ceil() as usize + config.extra_states;
    let mut solver = Solver {
        spec,
        cfg: config,
        v_ext: external_potential(spec),
        count,
        flags: Vec::new(),
    };
    if spec.mode() == BoundaryMode::Molecular && spec.electrons() > spec.total_charge() {
        solver.flag(format!(
            "N = {} exceeds Z = {}: outside the regime where minimisers are known to exist",
            spec.electrons(),
            spec.total_charge()
        ));
    }

    let pinned = config.pin_vector_potential;
    let (mut rho_in, mut a_in, mut block) = match warm {
        Some(w) => {
            cell.ensure_same(w.gamma.cell())?;
            cell.ensure_same(w.a.cell())?;
            let rho = crate::density::density(&w.gamma);
            let a = if pinned { MagneticPotential::zero(cell) } else { w.a.clone() };
            let block: Vec<SpinorField> = w.gamma.orbitals().iter().chain(&w.guard_vectors).cloned().collect();
            (rho, a, block)
        }
        None => {
            let rho = initial_density(spec);
            let a = if pinned || !config.polarize_initial {
                MagneticPotential::zero(cell)
            } else {
                let zero = VectorField::zeros(cell);
                let m = VectorField::from_components([ScalarField::zeros(cell), ScalarField::zeros(cell), rho.clone()])?;
                update_vector_potential(&zero, &m, &ScalarField::zeros(cell), &MagneticPotential::zero(cell), spec)?
            };
            (rho, a, Vec::new())
        }
    };

    let n = cell.len();
    let mut theta_rho = config.density_mixing;
    let mut theta_a = config.potential_mixing;
    let mut mixer = AndersonMixer::new(config.anderson_depth);
    let mut history = Vec::new();
    let mut reports = Vec::new();
    let mut accepted: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut halvings = 0;
    let mut last: Option<(Evaluation, ScfResiduals)> = None;

    for iteration in 1..=config.max_iter {
        let ev = solver.evaluate(&rho_in, &a_in, &block, config.seed)?;
        let e = ev.energy.total;
        if !e.is_finite() || e < config.energy_floor {
            solver.flag(format!("energy {e:.6e} below floor {:.3e}: instability regime", config.energy_floor));
            let residuals = solver.residuals(&ev, &rho_in).unwrap_or_default();
            return Ok(finish(ev, residuals, iteration, ScfStatus::Diverged, history, reports, solver.flags));
        }

        if let Some((x_prev, gx_prev, e_prev)) = &accepted {
            if e > e_prev + config.energy_slack * e_prev.abs().max(1.0) && halvings < config.step_halvings {
                halvings += 1;
                theta_rho *= 0.5;
                theta_a *= 0.5;
                mixer.reset();
                log::debug!("scf: energy rose to {e:.12} from {e_prev:.12}; mixing halved to {theta_rho:.3e}");
                let theta: Vec<f64> = (0..x_prev.len()).map(|i| if i < n { theta_rho } else { theta_a }).collect();
                let x: Vec<f64> = x_prev
                    .iter()
                    .zip(gx_prev)
                    .zip(&theta)
                    .map(|((x, g), t)| x + t * (g - x))
                    .collect();
                let (r, a) = unpack(cell, &x, pinned)?;
                rho_in = r;
                a_in = a;
                block = ev.gamma.orbitals().iter().chain(&ev.guard_vectors).cloned().collect();
                continue;
            }
            if halvings >= config.step_halvings && e > e_prev + config.energy_slack * e_prev.abs().max(1.0) {
                solver.flag("step control exhausted: accepted an energy increase");
            }
        }
        halvings = 0;

        let residuals = solver.residuals(&ev, &rho_in)?;
        history.push(e);
        if config.inequality_checks {
            let kinetic = covariant_kinetic(&ev.gamma, &ev.a_out)?;
            let report = inequality_sides(kinetic, &ev.obs.rho, &config.constants);
            if !report.all_hold() {
                solver.flag(format!("kinetic inequality violated at iteration {iteration}"));
            }
            reports.push(report);
        }
        log::info!(
            "scf iter {iteration:3}: E = {e:.12} res(orb {:.2e}, A {:.2e}, cont {:.2e}, rho {:.2e})",
            residuals.orbital,
            residuals.vector_potential,
            residuals.continuity,
            residuals.density
        );
        if residuals.all_below(config.tolerance) {
            return Ok(finish(ev, residuals, iteration, ScfStatus::Converged, history, reports, solver.flags));
        }

        let x = pack(&rho_in, &a_in);
        let gx = pack(&ev.obs.rho, &ev.a_out);
        let theta: Vec<f64> = (0..x.len()).map(|i| if i < n { theta_rho } else { theta_a }).collect();
        let next = mixer.step(&x, &gx, &theta);
        let (r, a) = unpack(cell, &next, pinned)?;
        rho_in = r;
        a_in = a;
        block = ev.gamma.orbitals().iter().chain(&ev.guard_vectors).cloned().collect();
        accepted = Some((x, gx, e));
        last = Some((ev, residuals));
    }

    match last {
        Some((ev, residuals)) => {
            solver.flag(format!("not converged after {} iterations", config.max_iter));
            Ok(finish(ev, residuals, config.max_iter, ScfStatus::NotConverged, history, reports, solver.flags))
        }
        None => Err(Error::Domain("scf: no step was accepted".into())),
    }
}

fn finish(
    ev: Evaluation,
    residuals: ScfResiduals,
    iterations: usize,
    status: ScfStatus,
    energy_history: Vec<f64>,
    inequality_reports: Vec<InequalityReport>,
    flags: Vec<String>,
) -> ScfState {
    ScfState {
        gamma: ev.gamma,
        a: ev.a_out,
        energy: ev.energy,
        iterations,
        residuals,
        fermi_energy: ev.filling.fermi_energy,
        levels: ev.levels,
        status,
        energy_history,
        inequality_reports,
        flags,
        guard_vectors: ev.guard_vectors,
    }
}

/// One row of an α-scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha: f64,
    pub energy: f64,
    pub status: ScfStatus,
    pub iterations: usize,
    pub max_residual: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub rows: Vec<AlphaRow>,
    /// `I(α_{k+1}) - I(α_k)`; non-positive for a non-increasing energy.
    pub increments: Vec<f64>,
    /// Second differences of `t ↦ I` at `t = α⁻²`, normalised to the
    /// uniform-grid stencil `I₀ - 2I₁ + I₂`; non-positive for concavity.
    pub concavity_defects: Vec<f64>,
}

impl AlphaScan {
    pub fn max_increment(&self) -> f64 {
        self.increments.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_concavity_defect(&self) -> f64 {
        self.concavity_defects.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Second differences of `I` as a function of `t = α⁻²`.
pub fn concavity_defects(alphas: &[f64], energies: &[f64]) -> Vec<f64> {
    let mut pts: Vec<(f64, f64)> = alphas.iter().zip(energies).map(|(a, e)| (a.powi(-2), *e)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(3)
        .map(|w| {
            let (t0, i0) = w[0];
            let (t1, i1) = w[1];
            let (t2, i2) = w[2];
            let interp = i0 + (i2 - i0) * (t1 - t0) / (t2 - t0);
            2.0 * (interp - i1)
        })
        .collect()
}

/// Ground-state energies over ascending `alphas`, each run warm-started from
/// the previous one.
pub fn scan_alpha(spec: &SystemSpec, alphas: &[f64], config: &ScfConfig) -> Result<AlphaScan> {
    if alphas.is_empty() {
        return Err(Error::invalid("alpha list is empty"));
    }
    if alphas.iter().any(|a| !(*a > 0.0)) || alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("alphas must be positive and strictly ascending"));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    let mut warm: Option<WarmStart> = None;
    for &alpha in alphas {
        let s = spec.clone().with_alpha(alpha)?;
        match scf_solve_from(&s, config, warm.as_ref()) {
            Ok(state) => {
                rows.push(AlphaRow {
                    alpha,
                    energy: state.energy.total,
                    status: state.status,
                    iterations: state.iterations,
                    max_residual: state.residuals.max(),
                    error: None,
                });
                warm = Some(state.warm_start());
            }
            Err(e) => rows.push(AlphaRow {
                alpha,
                energy: f64::NAN,
                status: ScfStatus::NotConverged,
                iterations: 0,
                max_residual: f64::NAN,
                error: Some(e.to_string()),
            }),
        }
    }
    let energies: Vec<f64> = rows.iter().map(|r| r.energy).collect();
    let increments = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let concavity_defects = concavity_defects(alphas, &energies);
    Ok(AlphaScan {
        rows,
        increments,
        concavity_defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ScfConfig::default().validate().is_ok());
        let bad = ScfConfig { density_mixing: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ScfConfig { tolerance: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn concavity_of_linear_and_concave_maps() {
        let alphas = [0.1, 0.2, 0.3, 0.4];
        let lin: Vec<f64> = alphas.iter().map(|a: &f64| 2.0 - 3.0 * a.powi(-2)).collect();
        assert!(concavity_defects(&alphas, &lin).iter().all(|d| d.abs() < 1e-10));
        let conc: Vec<f64> = alphas.iter().map(|a: &f64| -(a.powi(-2)).powi(2)).collect();
        assert!(concavity_defects(&alphas, &conc).iter().all(|d| *d < 0.0));
    }

    #[test]
    fn uniform_grid_matches_stencil() {
        let t = [1.0f64, 2.0, 3.0];
        let alphas: Vec<f64> = t.iter().rev().map(|t| t.powf(-0.5)).collect();
        let e: Vec<f64> = t.iter().rev().map(|t| t * t).collect();
        let d = concavity_defects(&alphas, &e);
        assert!((d[0] - (1.0 - 8.0 + 9.0)).abs() < 1e-12);
    }
}
