//! The Loss–Yau zero mode `σ·(p+A)Ψ = 0`, its dilations, the
//! scale-invariant functional `F_z`, rank-1 upper bounds on `β(z, N)` and
//! `α_c`, and the dilation instability scan.
//!
//! With `r = |x|` and a unit spin direction `w`,
//!
//! ```text
//! Ψ(x) = π⁻¹ (1+r²)^{-3/2} (1 - iσ·x) φ_w
//! A(x) = 3 (1+r²)^{-2} [(1-r²) w + 2 (w·x) x + 2 x×w]
//! B(x) = -12 (1+r²)^{-3} [(1-r²) w + 2 (w·x) x + 2 x×w]
//! ```
//!
//! This `A` has `div A = 6 (w·x)/(1+r²)²`; the Coulomb-gauge pair is
//! `A - ∇χ`, `e^{iχ}Ψ` with `χ = 3 (w·x)(atan r - r)/r³`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Cell, ScalarField, SpinorField, VectorField, C64};
use crate::pauli::{apply_sigma_dot_pa, MagneticPotential};
use crate::quadrature::integrate_to_infinity;

/// Sign of the `x×w` term in `A`, fixed by the zero-mode residual.
pub const CROSS_SIGN: f64 = 1.0;

const QUAD_TOL: f64 = 1e-13;

/// Radial integrals of the normalised family at `λ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeIntegrals {
    /// `c²` with `‖Ψ‖ = 1`.
    pub norm_sq: f64,
    /// `∫|Ψ|²/|x|`.
    pub i1: f64,
    /// `D(|Ψ|², |Ψ|²)`.
    pub d1: f64,
    /// `∫ B²`.
    pub b2: f64,
    /// `Tr((p+A)²|Ψ⟩⟨Ψ|) = -∫ B·m_Ψ`.
    pub covariant_kinetic: f64,
}

impl ZeroModeIntegrals {
    fn compute() -> Self {
        let q = |f: &dyn Fn(f64) -> f64| integrate_to_infinity(f, 0.0, QUAD_TOL, 0.0).value;
        let mass = q(&|r: f64| 4.0 * PI * r * r / (1.0 + r * r).powi(2));
        let norm_sq = 1.0 / mass;
        let i1 = norm_sq * q(&|r: f64| 4.0 * PI * r / (1.0 + r * r).powi(2));
        let d1 = norm_sq * norm_sq * q(&|r: f64| {
            let s = 1.0 + r * r;
            4.0 * PI * r * r / (s * s) * radial_potential_unnormalised(r)
        });
        let b2 = q(&|r: f64| 4.0 * PI * r * r * 144.0 / (1.0 + r * r).powi(4));
        let covariant_kinetic = norm_sq * q(&|r: f64| 4.0 * PI * r * r * 12.0 / (1.0 + r * r).powi(4));
        Self {
            norm_sq,
            i1,
            d1,
            b2,
            covariant_kinetic,
        }
    }
}

/// Newtonian potential of `(1+s²)^{-2}` by the shell formula
/// `(4π/r)∫₀^r s²ρ + 4π∫_r^∞ sρ`, both parts in closed form.
fn radial_potential_unnormalised(r: f64) -> f64 {
    let s = 1.0 + r * r;
    let inner = if r < 1e-4 {
        // ½(atan r - r/(1+r²)) / r = (2/3) r² - (4/5) r⁴ + …
        (2.0 / 3.0) * r * r - 0.8 * r.powi(4)
    } else {
        0.5 * (r.atan() - r / s) / r
    };
    4.0 * PI * (inner + 0.5 / s)
}

fn cached_integrals() -> ZeroModeIntegrals {
    static CACHE: std::sync::OnceLock<ZeroModeIntegrals> = std::sync::OnceLock::new();
    *CACHE.get_or_init(ZeroModeIntegrals::compute)
}

/// Loss–Yau pair with amplitude `ε` and dilation `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeFamily {
    w: [f64; 3],
    epsilon: f64,
    lambda: f64,
    base: ZeroModeIntegrals,
}

/// Rank-1 energy terms along the family (hartree).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyTerms {
    pub kinetic: f64,
    pub attraction: f64,
    pub hartree: f64,
    pub field: f64,
}

/// Unit spinor `φ_w` with `⟨φ_w, σ φ_w⟩ = w`.
pub fn spin_state(w: [f64; 3]) -> [C64; 2] {
    let theta = w[2].clamp(-1.0, 1.0).acos();
    let phi = w[1].atan2(w[0]);
    [
        C64::new((0.5 * theta).cos(), 0.0),
        C64::from_polar((0.5 * theta).sin(), phi),
    ]
}

fn bracket(w: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let wx = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
    let cross = [
        x[1] * w[2] - x[2] * w[1],
        x[2] * w[0] - x[0] * w[2],
        x[0] * w[1] - x[1] * w[0],
    ];
    let mut v = [0.0; 3];
    for a in 0..3 {
        v[a] = (1.0 - r2) * w[a] + 2.0 * wx * x[a] + CROSS_SIGN * 2.0 * cross[a];
    }
    v
}

/// `g(r) = 3(atan r - r)/r³` and `g'(r)/r`.
fn gauge_radial(r: f64) -> (f64, f64) {
    if r < 2e-2 {
        let r2 = r * r;
        let g = -1.0 + 0.6 * r2 - (3.0 / 7.0) * r2 * r2 + r2 * r2 * r2 / 3.0;
        let gp_over_r = 1.2 - (12.0 / 7.0) * r2 + 2.0 * r2 * r2 - (24.0 / 11.0) * r2 * r2 * r2;
        (g, gp_over_r)
    } else {
        let at = r.atan();
        let g = 3.0 * (at - r) / r.powi(3);
        let gp = 3.0 * (-1.0 / (r * (1.0 + r * r)) - 3.0 * (at - r) / r.powi(4));
        (g, gp / r)
    }
}

impl ZeroModeFamily {
    pub fn w(&self) -> [f64; 3] {
        self.w
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Integrals at `λ = 1`, `‖Ψ‖ = 1`.
    pub fn base_integrals(&self) -> ZeroModeIntegrals {
        self.base
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid(format!("amplitude must lie in [0, 1], got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// `Tr γ_ε = ε`, unchanged by dilation.
    pub fn trace(&self) -> f64 {
        self.epsilon
    }

    /// `Ψ_λ(x) = λ^{3/2} Ψ(λx)` (original gauge).
    pub fn psi(&self, x: [f64; 3]) -> [C64; 2] {
        let l = self.lambda;
        let y = [l * x[0], l * x[1], l * x[2]];
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let pref = l.powf(1.5) * self.base.norm_sq.sqrt() * (1.0 + r2).powf(-1.5);
        let phi = spin_state(self.w);
        // (1 - iσ·y) φ
        let sy = crate::pauli::sigma_dot_apply(y, phi);
        let i = C64::new(0.0, 1.0);
        [(phi[0] - i * sy[0]) * pref, (phi[1] - i * sy[1]) * pref]
    }

    /// `A_λ(x) = λ A(λx)` (original gauge).
    pub fn a(&self, x: [f64; 3]) -> [f64; 3] {
        let l = self.lambda;
        let y = [l * x[0], l * x[1], l * x[2]];
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let f = l * 3.0 / (1.0 + r2).powi(2);
        bracket(self.w, y).map(|v| f * v)
    }

    /// `B_λ(x) = λ² B(λx)`.
    pub fn b(&self, x: [f64; 3]) -> [f64; 3] {
        let l = self.lambda;
        let y = [l * x[0], l * x[1], l * x[2]];
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let f = -l * l * 12.0 / (1.0 + r2).powi(3);
        bracket(self.w, y).map(|v| f * v)
    }

    /// Gauge function `χ_λ(x) = χ(λx)` turning the pair divergence-free.
    pub fn gauge_function(&self, x: [f64; 3]) -> f64 {
        let l = self.lambda;
        let y = [l * x[0], l * x[1], l * x[2]];
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let wy = self.w[0] * y[0] + self.w[1] * y[1] + self.w[2] * y[2];
        wy * gauge_radial(r).0
    }

    /// Coulomb-gauge potential `A_λ - ∇χ_λ`.
    pub fn a_coulomb(&self, x: [f64; 3]) -> [f64; 3] {
        let l = self.lambda;
        let y = [l * x[0], l * x[1], l * x[2]];
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let wy = self.w[0] * y[0] + self.w[1] * y[1] + self.w[2] * y[2];
        let (g, gp_r) = gauge_radial(r);
        let a = self.a(x);
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = a[k] - l * (self.w[k] * g + wy * gp_r * y[k]);
        }
        out
    }

    /// Coulomb-gauge spinor `e^{iχ_λ} Ψ_λ`.
    pub fn psi_coulomb(&self, x: [f64; 3]) -> [C64; 2] {
        let ph = C64::from_polar(1.0, self.gauge_function(x));
        let p = self.psi(x);
        [p[0] * ph, p[1] * ph]
    }

    /// Energy terms of `γ_ε = ε|Ψ_λ⟩⟨Ψ_λ|` at nuclear charge `z` and coupling `α`.
    pub fn terms(&self, z: f64, alpha: f64) -> FamilyTerms {
        let l = self.lambda;
        let e = self.epsilon;
        FamilyTerms {
            kinetic: l * l * 0.0,
            attraction: -z * e * self.base.i1 * l,
            hartree: 0.5 * e * e * self.base.d1 * l,
            field: self.base.b2 * l / (8.0 * PI * alpha * alpha),
        }
    }

    /// `∫ρ/|x|`, `D(ρ, ρ)`, `∫B²` at the current `λ` for `ρ = |Ψ_λ|²`.
    pub fn scaled_integrals(&self) -> (f64, f64, f64) {
        let l = self.lambda;
        (self.base.i1 * l, self.base.d1 * l, self.base.b2 * l)
    }

    /// Samples the Coulomb-gauge pair on `cell`, centred at the cell centre.
    pub fn sample(&self, cell: &Cell) -> (SpinorField, VectorField) {
        let c = [0.5 * cell.length(); 3];
        let shift = |x: [f64; 3]| [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
        let psi = SpinorField::from_fn(*cell, |x| self.psi_coulomb(shift(x)));
        let a = VectorField::from_fn(*cell, |x| self.a_coulomb(shift(x)));
        (psi, a)
    }
}

/// The normalised Loss–Yau family with spin direction `w`, `ε = 1`, `λ = 1`.
pub fn loss_yau(w: [f64; 3]) -> Result<ZeroModeFamily> {
    let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("spin direction must be a unit vector, |w| = {n}")));
    }
    Ok(ZeroModeFamily {
        w,
        epsilon: 1.0,
        lambda: 1.0,
        base: cached_integrals(),
    })
}

/// `γ_λ(x, y) = λ³γ(λx, λy)`, `A_λ(x) = λA(λx)`; dilations compose.
pub fn dilate(fam: &ZeroModeFamily, lambda: f64) -> Result<ZeroModeFamily> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("dilation must be positive, got {lambda}")));
    }
    Ok(ZeroModeFamily {
        lambda: fam.lambda * lambda,
        ..*fam
    })
}

/// `F_z = (½ε²D₁ - zεI₁)/B₂`; `λ` cancels identically.
pub fn f_z(fam: &ZeroModeFamily, z: f64) -> Result<f64> {
    f_z_from(fam.base.d1, fam.base.i1, fam.base.b2, z, fam.epsilon)
}

pub fn f_z_from(d1: f64, i1: f64, b2: f64, z: f64, epsilon: f64) -> Result<f64> {
    if !(b2 > 0.0) {
        return Err(Error::Domain("degenerate family: ∫B² = 0".into()));
    }
    Ok((0.5 * epsilon * epsilon * d1 - z * epsilon * i1) / b2)
}

/// Minimiser `ε*` and value of the rank-1 quadratic over `[0, min(1, N)]`.
pub fn beta_rank1_from(d1: f64, i1: f64, b2: f64, z: f64, electrons: f64) -> Result<(f64, f64)> {
    if !(z > 0.0) || !(electrons > 0.0) {
        return Err(Error::invalid(format!("need z > 0 and N > 0, got z = {z}, N = {electrons}")));
    }
    let eps = (z * i1 / d1).min(1.0).min(electrons);
    let beta = f_z_from(d1, i1, b2, z, eps)?;
    if !(beta < 0.0) {
        return Err(Error::Domain(format!("rank-1 bound is not negative: {beta}")));
    }
    Ok((eps, beta))
}

/// Rank-1 upper bound `β_ub ≥ β(z, N)` from the family.
pub fn beta_rank1_upper_bound(z: f64, electrons: f64, fam: &ZeroModeFamily) -> Result<(f64, f64)> {
    beta_rank1_from(fam.base.d1, fam.base.i1, fam.base.b2, z, electrons)
}

/// `α_c = (-1/(8πβ))^{1/2}`.
pub fn alpha_c_from_beta(beta: f64) -> Result<f64> {
    if !(beta < 0.0) {
        return Err(Error::Domain(format!("stability threshold undefined for beta = {beta} >= 0")));
    }
    Ok((-1.0 / (8.0 * PI * beta)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstabilityScan {
    pub z: f64,
    pub electrons: f64,
    pub alpha: f64,
    pub epsilon_star: f64,
    pub beta_ub: f64,
    pub alpha_c_ub: f64,
    /// `½ε*²D₁ - zε*I₁ + B₂/(8πα²)`.
    pub closed_form_slope: f64,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
}

/// Single-atom energy along the dilation path of the optimal rank-1 state.
pub fn instability_scan(
    z: f64,
    electrons: f64,
    alpha: f64,
    lambdas: &[f64],
    fam: &ZeroModeFamily,
) -> Result<InstabilityScan> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("lambdas must be positive and strictly ascending"));
    }
    let (eps, beta) = beta_rank1_upper_bound(z, electrons, fam)?;
    let alpha_c = alpha_c_from_beta(beta)?;
    let base = dilate(&fam.with_epsilon(eps)?, 1.0 / fam.lambda)?;
    let mut energies = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let t = dilate(&base, l)?.terms(z, alpha);
        energies.push(t.kinetic + t.attraction + t.hartree + t.field);
    }
    let b = base.base;
    let closed_form_slope = 0.5 * eps * eps * b.d1 - z * eps * b.i1 + b.b2 / (8.0 * PI * alpha * alpha);
    let (fitted_slope, fitted_intercept) = linear_fit(lambdas, &energies);
    Ok(InstabilityScan {
        z,
        electrons,
        alpha,
        epsilon_star: eps,
        beta_ub: beta,
        alpha_c_ub: alpha_c,
        closed_form_slope,
        fitted_slope,
        fitted_intercept,
        lambdas: lambdas.to_vec(),
        energies,
    })
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return (y[0] / x[0], 0.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Grid residual `‖σ·(p+A)Ψ‖/‖Ψ‖` of the sampled Coulomb-gauge pair.
pub fn grid_residual(fam: &ZeroModeFamily, cell: &Cell) -> Result<f64> {
    let (psi, a) = fam.sample(cell);
    let a = MagneticPotential::new(a, false);
    let r = apply_sigma_dot_pa(&psi, &a)?;
    Ok(r.norm() / psi.norm())
}

/// `|Ψ|²` and `|B|` of the family sampled on `cell`.
pub fn sample_profiles(fam: &ZeroModeFamily, cell: &Cell) -> (ScalarField, ScalarField) {
    let c = [0.5 * cell.length(); 3];
    let rho = ScalarField::from_fn(*cell, |x| {
        let p = fam.psi([x[0] - c[0], x[1] - c[1], x[2] - c[2]]);
        fam.epsilon * (p[0].norm_sqr() + p[1].norm_sqr())
    });
    let b = ScalarField::from_fn(*cell, |x| {
        let v = fam.b([x[0] - c[0], x[1] - c[1], x[2] - c[2]]);
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    });
    (rho, b)
}
