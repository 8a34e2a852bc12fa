//! The mean-field Pauli Hamiltonian: kinetic term `½[σ·(p+A)]²`, nuclear
//! potentials, the periodic Green's function, Hartree and magnetic energies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    curl, divergence, forward_real, helmholtz_project, poisson_potential, Cell, Fft3, ScalarField,
    SpinorField, VectorField, C64,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub type Matrix2 = [[C64; 2]; 2];

/// The three Pauli matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliMatrices {
    pub x: Matrix2,
    pub y: Matrix2,
    pub z: Matrix2,
}

impl Default for PauliMatrices {
    fn default() -> Self {
        Self::new()
    }
}

impl PauliMatrices {
    pub const fn new() -> Self {
        let one = C64::new(1.0, 0.0);
        Self {
            x: [[ZERO, one], [one, ZERO]],
            y: [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]],
            z: [[one, ZERO], [ZERO, C64::new(-1.0, 0.0)]],
        }
    }

    pub fn all(&self) -> [Matrix2; 3] {
        [self.x, self.y, self.z]
    }

    /// `σ·v` for a real vector.
    pub fn dot(&self, v: [f64; 3]) -> Matrix2 {
        [
            [C64::new(v[2], 0.0), C64::new(v[0], -v[1])],
            [C64::new(v[0], v[1]), C64::new(-v[2], 0.0)],
        ]
    }
}

pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Action of `σ·v` on a spinor value.
#[inline]
pub fn sigma_dot_apply(v: [f64; 3], psi: [C64; 2]) -> [C64; 2] {
    let [u, d] = psi;
    [
        u * v[2] + d * C64::new(v[0], -v[1]),
        u * C64::new(v[0], v[1]) - d * v[2],
    ]
}

/// Divergence-free vector potential together with its field `B = curl A`.
#[derive(Clone, Debug, PartialEq)]
pub struct MagneticPotential {
    a: VectorField,
    b: VectorField,
    field_energy_raw: f64,
    vanishing: bool,
}

impl MagneticPotential {
    /// Projects `a` onto the Coulomb gauge and computes `B`.
    ///
    /// Modes on the Nyquist planes are removed: they cannot carry a real
    /// divergence-free field consistently. With `zero_mean` the `k = 0` mode
    /// is removed as well (periodic gauge condition).
    pub fn new(a: VectorField, zero_mean: bool) -> Self {
        let cell = *a.cell();
        let mut c = a.fourier();
        for comp in c.iter_mut() {
            for (idx, v) in comp.iter_mut().enumerate() {
                if cell.is_nyquist(idx) {
                    *v = ZERO;
                }
            }
        }
        let filtered = VectorField::from_fourier(cell, c).expect("coefficient length matches cell");
        let a = helmholtz_project(&filtered, zero_mean);
        Self::from_projected(a)
    }

    /// Takes `a` as given, without gauge projection or Nyquist filtering.
    pub fn unprojected(a: VectorField) -> Self {
        Self::from_projected(a)
    }

    pub(crate) fn from_projected(a: VectorField) -> Self {
        let b = curl(&a);
        let field_energy_raw = b.square_integral();
        let vanishing = a.max_abs() == 0.0;
        Self {
            a,
            b,
            field_energy_raw,
            vanishing,
        }
    }

    pub fn zero(cell: Cell) -> Self {
        Self {
            a: VectorField::zeros(cell),
            b: VectorField::zeros(cell),
            field_energy_raw: 0.0,
            vanishing: true,
        }
    }

    pub fn cell(&self) -> &Cell {
        self.a.cell()
    }

    pub fn a(&self) -> &VectorField {
        &self.a
    }

    pub fn b(&self) -> &VectorField {
        &self.b
    }

    /// `∫ B²` over the cell.
    pub fn field_energy_raw(&self) -> f64 {
        self.field_energy_raw
    }

    pub fn is_zero(&self) -> bool {
        self.vanishing
    }

    pub fn divergence_max(&self) -> f64 {
        divergence(&self.a).max_abs()
    }

    /// `(1-t)·self + t·other`, reprojected.
    pub fn mix(&self, other: &MagneticPotential, t: f64) -> Result<Self> {
        let a = self.a.scaled(1.0 - t).add(&other.a.scaled(t))?;
        Ok(Self::from_projected(a))
    }
}

/// A nucleus with charge `z > 0` at `position` inside the cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nucleus {
    pub charge: f64,
    pub position: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Whole-space problem approximated in a large periodic box.
    #[default]
    Molecular,
    /// Crystal with one nucleus set per unit cell.
    Periodic,
}

impl BoundaryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryMode::Molecular => "molecular",
            BoundaryMode::Periodic => "periodic",
        }
    }
}

/// Nuclei, cell, electron count and coupling constant.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    cell: Cell,
    nuclei: Vec<Nucleus>,
    mode: BoundaryMode,
    electrons: f64,
    alpha: f64,
    nucleus_width: Option<f64>,
}

impl SystemSpec {
    pub fn new(
        cell: Cell,
        nuclei: Vec<Nucleus>,
        mode: BoundaryMode,
        electrons: f64,
        alpha: f64,
    ) -> Result<Self> {
        let spec = Self {
            cell,
            nuclei,
            mode,
            electrons,
            alpha,
            nucleus_width: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Gaussian width used to regularise nuclei; `0` gives the bare
    /// (truncated) point charge. Defaults to two grid spacings.
    pub fn with_nucleus_width(mut self, width: f64) -> Result<Self> {
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::invalid(format!("nucleus width must be >= 0, got {width}")));
        }
        self.nucleus_width = Some(width);
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nuclei.is_empty() {
            return Err(Error::invalid("at least one nucleus is required"));
        }
        let len = self.cell.length();
        for (i, n) in self.nuclei.iter().enumerate() {
            if !(n.charge > 0.0) || !n.charge.is_finite() {
                return Err(Error::invalid(format!("nucleus {i}: charge must be positive, got {}", n.charge)));
            }
            if n.position.iter().any(|&p| !(0.0..len).contains(&p)) {
                return Err(Error::invalid(format!(
                    "nucleus {i}: position {:?} outside the cell [0, {len})",
                    n.position
                )));
            }
        }
        if !(self.electrons > 0.0) || !self.electrons.is_finite() {
            return Err(Error::invalid(format!("electron count must be positive, got {}", self.electrons)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.mode == BoundaryMode::Periodic && (self.electrons - self.total_charge()).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "periodic mode requires N = Z per cell (N = {}, Z = {})",
                self.electrons,
                self.total_charge()
            )));
        }
        Ok(())
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn electrons(&self) -> f64 {
        self.electrons
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nucleus_width(&self) -> f64 {
        self.nucleus_width.unwrap_or(2.0 * self.cell.spacing())
    }

    /// `Z = Σ z_j`.
    pub fn total_charge(&self) -> f64 {
        self.nuclei.iter().map(|n| n.charge).sum()
    }

    /// `z = max z_j`.
    pub fn max_charge(&self) -> f64 {
        self.nuclei.iter().map(|n| n.charge).fold(0.0, f64::max)
    }

    pub fn zero_mean_gauge(&self) -> bool {
        self.mode == BoundaryMode::Periodic
    }
}

struct SpinorDerivatives {
    /// `p_a ψ_s` for `s` in 0..2, `a` in 0..3.
    p: [[Vec<C64>; 3]; 2],
}

fn momentum_components(psi: &SpinorField) -> (SpinorDerivatives, [Vec<C64>; 2]) {
    let cell = *psi.cell();
    let fft = Fft3::for_points(cell.points());
    let k = cell.wavenumbers();
    let mut hats: [Vec<C64>; 2] = [psi.up().to_vec(), psi.down().to_vec()];
    let mut p: [[Vec<C64>; 3]; 2] = Default::default();
    for s in 0..2 {
        fft.forward(&mut hats[s]);
        for a in 0..3 {
            let mut buf = hats[s].clone();
            for (idx, v) in buf.iter_mut().enumerate() {
                *v *= k[cell.unravel(idx)[a]];
            }
            fft.inverse(&mut buf);
            p[s][a] = buf;
        }
    }
    (SpinorDerivatives { p }, hats)
}

/// `½[σ·(p+A)]²ψ = ½(p+A)²ψ + ½(σ·B)ψ`, with `(p+A)²` applied as
/// `p² + A·p + p·A + A²` (derivatives in Fourier space, products on the
/// grid).
pub fn apply_pauli_kinetic(psi: &SpinorField, a: &MagneticPotential) -> Result<SpinorField> {
    psi.cell().ensure_same(a.cell())?;
    Ok(pauli_kinetic_unchecked(psi, a))
}

pub(crate) fn pauli_kinetic_unchecked(psi: &SpinorField, a: &MagneticPotential) -> SpinorField {
    let cell = *psi.cell();
    let fft = Fft3::for_points(cell.points());
    let k2 = cell.k_squared();
    let mut out = SpinorField::zeros(cell);

    if a.is_zero() {
        for s in 0..2 {
            let mut buf = psi.component(s).to_vec();
            fft.forward(&mut buf);
            for (v, kk) in buf.iter_mut().zip(&k2) {
                *v *= 0.5 * kk;
            }
            fft.inverse(&mut buf);
            *out.component_mut(s) = buf;
        }
        return out;
    }

    let k = cell.wavenumbers();
    let (der, hats) = momentum_components(psi);
    let av = a.a().components();
    let bv = a.b();
    for s in 0..2 {
        let u = psi.component(s);
        // Fourier accumulator for p²u + p·(A u)
        let mut acc: Vec<C64> = hats[s].iter().zip(&k2).map(|(v, kk)| v * kk).collect();
        for ax in 0..3 {
            let mut au: Vec<C64> = u.iter().zip(av[ax].values()).map(|(v, w)| v * w).collect();
            fft.forward(&mut au);
            for (idx, (t, v)) in acc.iter_mut().zip(&au).enumerate() {
                *t += v * k[cell.unravel(idx)[ax]];
            }
        }
        fft.inverse(&mut acc);
        for idx in 0..cell.len() {
            let avec = [av[0].values()[idx], av[1].values()[idx], av[2].values()[idx]];
            let a2 = avec[0] * avec[0] + avec[1] * avec[1] + avec[2] * avec[2];
            let adotp = der.p[s][0][idx] * avec[0] + der.p[s][1][idx] * avec[1] + der.p[s][2][idx] * avec[2];
            acc[idx] = 0.5 * (acc[idx] + adotp + u[idx] * a2);
        }
        *out.component_mut(s) = acc;
    }
    for idx in 0..cell.len() {
        let sb = sigma_dot_apply(bv.at(idx), psi.at(idx));
        out.up_mut()[idx] += 0.5 * sb[0];
        out.down_mut()[idx] += 0.5 * sb[1];
    }
    out
}

/// `σ·(p+A)ψ`.
pub fn apply_sigma_dot_pa(psi: &SpinorField, a: &MagneticPotential) -> Result<SpinorField> {
    psi.cell().ensure_same(a.cell())?;
    let cell = *psi.cell();
    let (der, _) = momentum_components(psi);
    let av = a.a();
    let mut out = SpinorField::zeros(cell);
    for idx in 0..cell.len() {
        let avec = av.at(idx);
        let mut v = [[ZERO; 3]; 2];
        for s in 0..2 {
            let val = psi.component(s)[idx];
            for ax in 0..3 {
                v[s][ax] = der.p[s][ax][idx] + val * avec[ax];
            }
        }
        // σ_x v_x + σ_y v_y + σ_z v_z acting on the spinor index
        let up = v[1][0] - I * v[1][1] + v[0][2];
        let down = v[0][0] + I * v[0][1] - v[1][2];
        out.up_mut()[idx] = up;
        out.down_mut()[idx] = down;
    }
    Ok(out)
}

/// Series coefficients of `Σ_j z_j · G(· - R_j)` smeared by a Gaussian of
/// width `s`; `k = 0` is dropped.
fn nuclear_coefficients(cell: &Cell, nuclei: &[(f64, [f64; 3])], width: f64) -> Vec<C64> {
    let n = cell.points();
    let k = cell.wavenumbers();
    let k2 = cell.k_squared();
    let vol = cell.volume();
    let mut out = vec![ZERO; cell.len()];
    for &(z, r) in nuclei {
        let phase: Vec<Vec<C64>> = (0..3)
            .map(|ax| k.iter().map(|&kk| C64::from_polar(1.0, -kk * r[ax])).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                let pij = phase[0][i] * phase[1][j];
                for l in 0..n {
                    let idx = cell.index(i, j, l);
                    if idx == 0 {
                        continue;
                    }
                    let kk = k2[idx];
                    let damp = (-0.5 * kk * width * width).exp();
                    out[idx] += pij * phase[2][l] * (z * 4.0 * PI / (kk * vol) * damp);
                }
            }
        }
    }
    out
}

fn real_part_inverse(cell: &Cell, mut c: Vec<C64>) -> ScalarField {
    Fft3::for_points(cell.points()).inverse(&mut c);
    ScalarField::from_values(*cell, c.into_iter().map(|v| v.re).collect()).expect("length matches")
}

/// Nuclear potential `V = -Σ z_j G(· - R_j)` with the `k = 0` mode removed.
///
/// The same Fourier construction serves both modes: in periodic mode it is
/// `V_per` exactly, in molecular mode it approximates the whole-space
/// Coulomb potential in a large box. Nuclei are Gaussians of width
/// [`SystemSpec::nucleus_width`].
pub fn external_potential(spec: &SystemSpec) -> ScalarField {
    let nuclei: Vec<_> = spec.nuclei().iter().map(|n| (-n.charge, n.position)).collect();
    let c = nuclear_coefficients(spec.cell(), &nuclei, spec.nucleus_width());
    real_part_inverse(spec.cell(), c)
}

/// Potential `G(· - R)` of a unit charge at `position`, smeared by a
/// Gaussian of width `width` (`0` for the bare truncated series).
pub fn point_charge_potential(cell: &Cell, position: [f64; 3], width: f64) -> ScalarField {
    let c = nuclear_coefficients(cell, &[(1.0, position)], width);
    real_part_inverse(cell, c)
}

/// Periodic Green's function of the cell tabulated on the grid:
/// `Ĝ_k = 4π/(|Γ||k|²)` (series coefficients), `Ĝ_0 = 0`.
pub fn green_function_gr(cell: &Cell) -> ScalarField {
    let c = nuclear_coefficients(cell, &[(1.0, [0.0; 3])], 0.0);
    real_part_inverse(cell, c)
}

/// Mean-zero periodic Green's function evaluated pointwise by Ewald
/// summation; `exclude_self` subtracts the `1/|x|` singularity of the nearest
/// image.
pub fn periodic_green_ewald(cell: &Cell, x: [f64; 3], exclude_self: bool) -> f64 {
    let len = cell.length();
    let vol = cell.volume();
    let eta = 4.0 / len;
    let d = cell.displacement(x, [0.0; 3]);

    let mut real = 0.0;
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            for c in -2i32..=2 {
                let y = [
                    d[0] + a as f64 * len,
                    d[1] + b as f64 * len,
                    d[2] + c as f64 * len,
                ];
                let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                if a == 0 && b == 0 && c == 0 && exclude_self {
                    real += if r < 1e-8 {
                        -2.0 * eta / PI.sqrt()
                    } else {
                        -libm::erf(eta * r) / r
                    };
                } else {
                    real += libm::erfc(eta * r) / r;
                }
            }
        }
    }

    let mmax = 10i32;
    let q = 2.0 * PI / len;
    let mut recip = 0.0;
    for a in -mmax..=mmax {
        for b in -mmax..=mmax {
            for c in -mmax..=mmax {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let kv = [a as f64 * q, b as f64 * q, c as f64 * q];
                let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
                let kx = kv[0] * d[0] + kv[1] * d[1] + kv[2] * d[2];
                recip += (-k2 / (4.0 * eta * eta)).exp() / k2 * kx.cos();
            }
        }
    }
    real + 4.0 * PI / vol * recip - PI / (eta * eta * vol)
}

/// Hartree potential `φ = 4π(-Δ)⁻¹ρ` (k = 0 dropped) and energy `½⟨ρ, φ⟩`.
pub fn hartree(rho: &ScalarField) -> (ScalarField, f64) {
    let min = rho.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        log::warn!("hartree: density has negative values down to {min:.3e}");
    }
    let phi = poisson_potential(rho);
    let energy = 0.5 * rho.inner(&phi).expect("same cell");
    (phi, energy)
}

/// Hartree cross term `D(f, g) = ⟨f, 4π(-Δ)⁻¹ g⟩` on the grid.
pub fn hartree_cross(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    f.cell().ensure_same(g.cell())?;
    let cell = *f.cell();
    let fh = f.fourier();
    let gh = forward_real(&cell, g.values());
    let k2 = cell.k_squared();
    let s: f64 = fh
        .iter()
        .zip(&gh)
        .zip(&k2)
        .skip(1)
        .map(|((a, b), k)| (a.conj() * b).re * 4.0 * PI / k)
        .sum();
    Ok(s * cell.volume())
}

/// `(1/(8πα²)) ∫ B²`.
pub fn magnetic_energy(a: &MagneticPotential, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(a.field_energy_raw() / (8.0 * PI * alpha * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-15
    }

    #[test]
    fn pauli_algebra() {
        let s = PauliMatrices::new();
        let id = [[C64::new(1.0, 0.0), ZERO], [ZERO, C64::new(1.0, 0.0)]];
        for m in s.all() {
            let sq = matmul2(&m, &m);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(close(sq[i][j], id[i][j]));
                    assert!(close(m[i][j], m[j][i].conj()));
                }
            }
            assert!(close(m[0][0] + m[1][1], ZERO));
        }
        let cyc = [(s.x, s.y, s.z), (s.y, s.z, s.x), (s.z, s.x, s.y)];
        for (a, b, c) in cyc {
            let ab = matmul2(&a, &b);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(close(ab[i][j], I * c[i][j]));
                }
            }
        }
    }

    #[test]
    fn sigma_dot_matches_matrices() {
        let s = PauliMatrices::new();
        let v = [0.3, -1.2, 0.7];
        let m = s.dot(v);
        for i in 0..2 {
            for j in 0..2 {
                let e = s.x[i][j] * v[0] + s.y[i][j] * v[1] + s.z[i][j] * v[2];
                assert!(close(m[i][j], e));
            }
        }
    }

    #[test]
    fn free_plane_wave() {
        let cell = Cell::new(6.0, 8).unwrap();
        let q = 2.0 * PI / 6.0;
        let kv = [q, -2.0 * q, 0.0];
        let psi = SpinorField::from_fn(cell, |x| {
            [C64::from_polar(1.0, kv[0] * x[0] + kv[1] * x[1]), ZERO]
        });
        let h = apply_pauli_kinetic(&psi, &MagneticPotential::zero(cell)).unwrap();
        let e = 0.5 * (kv[0] * kv[0] + kv[1] * kv[1]);
        let diff = h.sub(&psi.scaled(C64::new(e, 0.0))).unwrap();
        assert!(diff.norm() < 1e-12 * psi.norm());
    }

    #[test]
    fn constant_potential_shifts_plane_wave() {
        // a constant A is pure gauge: (p+A)² e^{ikx} = |k+A|² e^{ikx}
        let cell = Cell::new(6.0, 8).unwrap();
        let q = 2.0 * PI / 6.0;
        let c = [0.2, -0.1, 0.4];
        let a = MagneticPotential::new(VectorField::from_fn(cell, |_| c), false);
        assert!(a.field_energy_raw() < 1e-24);
        let psi = SpinorField::from_fn(cell, |x| [ZERO, C64::from_polar(1.0, q * x[2])]);
        let h = apply_pauli_kinetic(&psi, &a).unwrap();
        let e = 0.5 * (c[0] * c[0] + c[1] * c[1] + (q + c[2]) * (q + c[2]));
        let diff = h.sub(&psi.scaled(C64::new(e, 0.0))).unwrap();
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let cell = Cell::new(10.0, 8).unwrap();
        let nuc = Nucleus { charge: 1.0, position: [5.0; 3] };
        assert!(SystemSpec::new(cell, vec![nuc], BoundaryMode::Molecular, 1.0, 0.0).is_err());
        assert!(SystemSpec::new(cell, vec![], BoundaryMode::Molecular, 1.0, 0.1).is_err());
        assert!(SystemSpec::new(cell, vec![nuc], BoundaryMode::Periodic, 2.0, 0.1).is_err());
        assert!(SystemSpec::new(cell, vec![nuc], BoundaryMode::Molecular, 2.0, 0.1).is_ok());
        let bad = Nucleus { charge: 1.0, position: [10.0, 0.0, 0.0] };
        assert!(SystemSpec::new(cell, vec![bad], BoundaryMode::Molecular, 1.0, 0.1).is_err());
        let neg = Nucleus { charge: -1.0, position: [1.0; 3] };
        assert!(SystemSpec::new(cell, vec![neg], BoundaryMode::Molecular, 1.0, 0.1).is_err());
    }

    #[test]
    fn magnetic_energy_alpha_scaling() {
        let cell = Cell::new(8.0, 8).unwrap();
        let q = 2.0 * PI / 8.0;
        let a = MagneticPotential::new(VectorField::from_fn(cell, |x| [(q * x[1]).sin(), 0.0, 0.0]), true);
        let e1 = magnetic_energy(&a, 0.3).unwrap();
        let e2 = magnetic_energy(&a, 0.6).unwrap();
        assert!((e1 / e2 - 4.0).abs() < 1e-12);
        assert!(magnetic_energy(&a, 0.0).is_err());
        assert_eq!(magnetic_energy(&MagneticPotential::zero(cell), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ewald_is_mean_zero_and_matches_grid_series() {
        let cell = Cell::new(10.0, 32).unwrap();
        let g = green_function_gr(&cell);
        assert!(g.mean().abs() < 1e-12);
        // far from the singularity the truncated series agrees with Ewald
        let idx = cell.index(16, 8, 4);
        let e = periodic_green_ewald(&cell, cell.position(idx), false);
        assert!((g.values()[idx] - e).abs() < 1e-4, "{} vs {e}", g.values()[idx]);
    }
}
