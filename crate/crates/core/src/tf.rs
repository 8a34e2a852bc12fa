//! Radial Thomas–Fermi minimisation, the penalised functional `F_z^λ` and the
//! `z^{7/6}` lower-bound chain for `β_c(z)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::{density, pauli_kinetic_energy, DensityMatrix, InequalityConstants};
use crate::error::{Error, Result};
use crate::pauli::{hartree, point_charge_potential, MagneticPotential, SystemSpec};
use crate::scf::AndersonMixer;
use crate::zero_modes::{f_z, ZeroModeFamily};

/// Logarithmically spaced radii with trapezoid weights for `∫ 4πr² f dr`
/// (integrated in `t = ln r`).
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    r: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) || count < 3 {
            return Err(Error::invalid(format!(
                "radial grid needs 0 < r_min < r_max and at least 3 points (got {r_min}, {r_max}, {count})"
            )));
        }
        let dt = (r_max / r_min).ln() / (count - 1) as f64;
        let r: Vec<f64> = (0..count).map(|i| r_min * (i as f64 * dt).exp()).collect();
        let mut weights: Vec<f64> = r.iter().map(|&x| 4.0 * PI * x.powi(3) * dt).collect();
        weights[0] *= 0.5;
        weights[count - 1] *= 0.5;
        Ok(Self { r, weights })
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `∫ 4πr² f(r) dr`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.r.iter().map(|&r| f(r)).collect()
    }

    /// Radial Coulomb potential `U_i = Σ_j w_j ρ_j / max(r_i, r_j)`.
    pub fn coulomb_potential(&self, rho: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut inner = vec![0.0; n];
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.weights[i] * rho[i];
            inner[i] = acc;
        }
        let mut outer = vec![0.0; n];
        let mut acc = 0.0;
        for i in (0..n).rev() {
            outer[i] = acc;
            acc += self.weights[i] * rho[i] / self.r[i];
        }
        (0..n).map(|i| inner[i] / self.r[i] + outer[i]).collect()
    }
}

/// Nonnegative radial density.
#[derive(Clone, Debug, PartialEq)]
pub struct TFDensity {
    grid: RadialGrid,
    rho: Vec<f64>,
}

impl TFDensity {
    /// Builds a density; negative values are projected to zero.
    pub fn new(grid: RadialGrid, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(Error::invalid("density length does not match the radial grid"));
        }
        if rho.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("density has non-finite values"));
        }
        let rho = rho.into_iter().map(|v| v.max(0.0)).collect();
        Ok(Self { grid, rho })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }
}

/// Thomas–Fermi energy terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfEnergy {
    /// `∫ρ^{5/3}`.
    pub kinetic: f64,
    /// `½D(ρ, ρ)`.
    pub hartree: f64,
    /// `-∫ρ/|x|`.
    pub attraction: f64,
    pub total: f64,
}

pub fn tf_energy(rho0: &TFDensity) -> TfEnergy {
    let g = &rho0.grid;
    let rho = &rho0.rho;
    let kinetic = g.integrate(&rho.iter().map(|v| v.powf(5.0 / 3.0)).collect::<Vec<_>>());
    let u = g.coulomb_potential(rho);
    let hartree = 0.5 * g.integrate(&rho.iter().zip(&u).map(|(a, b)| a * b).collect::<Vec<_>>());
    let attraction = -g.integrate(&rho.iter().zip(g.radii()).map(|(a, r)| a / r).collect::<Vec<_>>());
    TfEnergy {
        kinetic,
        hartree,
        attraction,
        total: kinetic + hartree + attraction,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TfConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub max_iter: usize,
    /// Bound on the first-order residual `max_i r_i·|∂E/∂ρ_i|` (complementary
    /// form where `ρ_i = 0`).
    pub tolerance: f64,
    pub mixing: f64,
    pub anderson_depth: usize,
}

impl Default for TfConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-12,
            r_max: 1e3,
            points: 4096,
            max_iter: 5000,
            tolerance: 1e-8,
            mixing: 0.5,
            anderson_depth: 10,
        }
    }
}

impl TfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.mixing > 0.0 && self.mixing <= 1.0) || self.max_iter == 0 {
            return Err(Error::invalid("tf: tolerance > 0, mixing in (0, 1] and max_iter > 0 required"));
        }
        RadialGrid::new(self.r_min, self.r_max, self.points).map(|_| ())
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_min, self.r_max, self.points)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfSolution {
    pub energy: f64,
    pub terms: TfEnergy,
    pub density: TFDensity,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `∂E/∂ρ_i / w_i = (5/3)ρ^{2/3} + U - 1/r`.
fn gradient(grid: &RadialGrid, rho: &[f64]) -> Vec<f64> {
    let u = grid.coulomb_potential(rho);
    rho.iter()
        .zip(&u)
        .zip(grid.radii())
        .map(|((p, u), r)| (5.0 / 3.0) * p.powf(2.0 / 3.0) + u - 1.0 / r)
        .collect()
}

/// Scaled complementarity residual of the nonnegativity-constrained problem.
pub fn kkt_residual(grid: &RadialGrid, rho: &[f64]) -> f64 {
    let g = gradient(grid, rho);
    rho.iter()
        .zip(&g)
        .zip(grid.radii())
        .map(|((p, g), r)| if *p > 0.0 { r * g.abs() } else { r * (-g).max(0.0) })
        .fold(0.0, f64::max)
}

/// Minimises the Thomas–Fermi functional (unit charge, no mass constraint)
/// by a projected fixed-point iteration `ρ ← ((3/5)(1/r - U))_+^{3/2}` with
/// Anderson acceleration in the `√w`-weighted norm.
pub fn tf_minimize(grid: &RadialGrid, config: &TfConfig) -> Result<TfSolution> {
    config.validate()?;
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let map = |rho: &[f64]| -> Vec<f64> {
        let u = grid.coulomb_potential(rho);
        u.iter()
            .zip(grid.radii())
            .map(|(u, r)| (0.6 * (1.0 / r - u)).max(0.0).powf(1.5))
            .collect()
    };
    let mut rho: Vec<f64> = grid.sample(|r| (0.6 / r).powf(1.5) * (-r).exp());
    let mut mixer = AndersonMixer::new(config.anderson_depth);
    let theta = vec![config.mixing; grid.len()];
    let mut iterations = 0;
    let mut residual = kkt_residual(grid, &rho);
    while residual > config.tolerance && iterations < config.max_iter {
        iterations += 1;
        let image = map(&rho);
        let y: Vec<f64> = rho.iter().zip(&sw).map(|(p, s)| p * s).collect();
        let gy: Vec<f64> = image.iter().zip(&sw).map(|(p, s)| p * s).collect();
        let next = mixer.step(&y, &gy, &theta);
        rho = next.iter().zip(&sw).map(|(v, s)| (v / s).max(0.0)).collect();
        residual = kkt_residual(grid, &rho);
    }
    let density = TFDensity::new(grid.clone(), rho)?;
    let terms = tf_energy(&density);
    Ok(TfSolution {
        energy: terms.total,
        terms,
        density,
        kkt_residual: residual,
        iterations,
        converged: residual <= config.tolerance,
    })
}

/// Argument of [`penalised_f`].
pub enum PenalisedInput<'a> {
    /// Analytic zero-mode family.
    Family(&'a ZeroModeFamily),
    /// Grid state; the attraction is to the first nucleus of `spec`.
    Grid {
        gamma: &'a DensityMatrix,
        a: &'a MagneticPotential,
        spec: &'a SystemSpec,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenalisedValue {
    /// `½D(ρ,ρ) - z∫ρ/|x| + λ Tr([σ·(p+A)]²γ)` after rescaling to `‖B‖ = 1`.
    pub value: f64,
    /// The same without the penalty term.
    pub unpenalised: f64,
    /// `Tr([σ·(p+A)]²γ)` after rescaling.
    pub kinetic: f64,
}

/// Penalised functional `F_z^λ`, evaluated after the dilation that brings
/// `∫B²` to one (`D`, `∫ρ/|x|` scale with `μ`, the kinetic trace with `μ²`).
pub fn penalised_f(input: PenalisedInput<'_>, z: f64, lambda: f64) -> Result<PenalisedValue> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("penalty must be >= 0, got {lambda}")));
    }
    match input {
        PenalisedInput::Family(fam) => {
            let unpenalised = f_z(fam, z)?;
            Ok(PenalisedValue {
                value: unpenalised,
                unpenalised,
                kinetic: 0.0,
            })
        }
        PenalisedInput::Grid { gamma, a, spec } => {
            let b2 = a.field_energy_raw();
            if !(b2 > 0.0) {
                return Err(Error::Domain("cannot rescale a state with B = 0 to unit field energy".into()));
            }
            let mu = 1.0 / b2;
            let rho = density(gamma);
            let (_, half_d) = hartree(&rho);
            let nucleus = spec.nuclei()[0];
            let v = point_charge_potential(spec.cell(), nucleus.position, spec.nucleus_width());
            let attraction = z * v.inner(&rho)?;
            let kinetic = 2.0 * pauli_kinetic_energy(gamma, a)? * mu * mu;
            let unpenalised = mu * (half_d - attraction);
            Ok(PenalisedValue {
                value: unpenalised + lambda * kinetic,
                unpenalised,
                kinetic,
            })
        }
    }
}

/// Every intermediate quantity of the lower-bound chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundLedger {
    pub z: f64,
    pub c_lt: f64,
    pub sobolev: f64,
    pub c2: f64,
    /// `S₃^{-3/8}` in `‖ρ‖₂ ≤ S₃^{-3/8} ‖ρ‖_{5/3}^{5/8} ‖∇√ρ‖₂^{3/4}`.
    pub interpolation_constant: f64,
    /// Young parameter `ε` with `S₃^{-3/8} ε = C_LT/4`.
    pub young_epsilon: f64,
    /// Coefficient `K` of `‖∇√ρ‖₂^{6/5}` after the Young split.
    pub young_coefficient: f64,
    /// Maximiser of `K Y^{6/5} - Y²/2`.
    pub y_star: f64,
    /// `C = max_Y (K Y^{6/5} - Y²/2) = (2K/5)(6K/5)^{3/2}`.
    pub chain_constant: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// `λ C_LT a^{5/3} b² / 4`, `a² b / 2 · 2`, `z a b`; all equal `z^{7/6}`.
    pub scaled_coefficients: [f64; 3],
    pub i_tf: f64,
    /// `4C/C_LT`, the constant subtracted from `I^TF`.
    pub penalty: f64,
    /// `(I^TF - 4C/C_LT) z^{7/6}`.
    pub bound: f64,
}

/// Lower bound `β_c(z) ≥ (I^TF - 4C/C_LT) z^{7/6}` under the configured
/// constants. `i_tf` is computed with [`tf_minimize`] when absent.
pub fn beta_lower_bound_chain(
    z: f64,
    constants: &InequalityConstants,
    i_tf: Option<f64>,
    tf: &TfConfig,
) -> Result<LowerBoundLedger> {
    if !(z > 0.0) {
        return Err(Error::invalid(format!("z must be positive, got {z}")));
    }
    constants.validate()?;
    let i_tf = match i_tf {
        Some(v) => v,
        None => {
            let sol = tf_minimize(&tf.grid()?, tf)?;
            if !sol.converged {
                return Err(Error::Domain(format!(
                    "Thomas-Fermi minimisation did not converge (residual {:.2e})",
                    sol.kkt_residual
                )));
            }
            sol.energy
        }
    };
    let c_lt = constants.c_lt;
    let interp = constants.sobolev.powf(-3.0 / 8.0);
    let eps = c_lt / (4.0 * interp);
    let k = interp * 0.625 * (3.0 / (8.0 * eps)).powf(0.6);
    let y_star = (1.2 * k).powf(1.25);
    let chain_constant = 0.4 * k * (1.2 * k).powf(1.5);
    let a = z;
    let b = z.powf(-5.0 / 6.0);
    let z76 = z.powf(7.0 / 6.0);
    let lambda = 4.0 / c_lt * z76;
    let scaled_coefficients = [
        lambda * c_lt / 4.0 * a.powf(5.0 / 3.0) * b * b,
        a * a * b,
        z * a * b,
    ];
    let penalty = 4.0 * chain_constant / c_lt;
    Ok(LowerBoundLedger {
        z,
        c_lt,
        sobolev: constants.sobolev,
        c2: constants.c2,
        interpolation_constant: interp,
        young_epsilon: eps,
        young_coefficient: k,
        y_star,
        chain_constant,
        a,
        b,
        lambda,
        scaled_coefficients,
        i_tf,
        penalty,
        bound: (i_tf - penalty) * z76,
    })
}
