//! Periodic cubic cells, real/Fourier field representations, spectral
//! differential operators, the Coulomb-gauge projection and the Poisson
//! solver.
//!
//! Fourier coefficients use the series convention `f(x) = Σ_k c_k e^{ik·x}`,
//! i.e. `c_k = n⁻³ Σ_x f(x) e^{-ik·x}`. Grid integrals are `h³ Σ_x f(x)`.
//!
//! Real fields are differentiated with the Nyquist wavenumber set to zero so
//! that derivatives stay real; complex spinors keep the Nyquist wavenumber
//! (`-n/2`) so that the momentum operator is Hermitian and has no spurious
//! kernel.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Simple cubic periodic cell `[0, L)³` sampled by `n³` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    length: f64,
    points: usize,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cell(L={}, n={})", self.length, self.points)
    }
}

impl Cell {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidCell(format!("edge length must be positive, got {length}")));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidCell(format!(
                "grid points per axis must be even and >= 4, got {points}"
            )));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of grid points `n³`.
    pub fn len(&self) -> usize {
        self.points * self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Volume element `h³` of the grid quadrature.
    pub fn dv(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.points + j) * self.points + l
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.points;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let [i, j, l] = self.unravel(idx);
        [i as f64 * h, j as f64 * h, l as f64 * h]
    }

    /// Minimum-image displacement `x - center` in the periodic cell.
    pub fn displacement(&self, x: [f64; 3], center: [f64; 3]) -> [f64; 3] {
        let len = self.length;
        let mut d = [0.0; 3];
        for a in 0..3 {
            let mut v = x[a] - center[a];
            v -= len * (v / len).round();
            d[a] = v;
        }
        d
    }

    /// Signed integer frequency of FFT index `m` in `[-n/2, n/2)`.
    #[inline]
    pub fn frequency(&self, m: usize) -> i64 {
        let n = self.points as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// FFT index of a signed frequency.
    pub fn mode_index(&self, fx: i64, fy: i64, fz: i64) -> usize {
        let n = self.points as i64;
        let wrap = |f: i64| f.rem_euclid(n) as usize;
        self.index(wrap(fx), wrap(fy), wrap(fz))
    }

    /// Per-axis wavenumbers `2π f / L`, Nyquist kept as `-πn/L`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points)
            .map(|m| 2.0 * PI * self.frequency(m) as f64 / self.length)
            .collect()
    }

    /// Per-axis wavenumbers used for real fields: Nyquist set to zero.
    pub fn wavenumbers_real(&self) -> Vec<f64> {
        let n2 = self.points / 2;
        let mut k = self.wavenumbers();
        k[n2] = 0.0;
        k
    }

    pub fn k_vector(&self, idx: usize) -> [f64; 3] {
        let [i, j, l] = self.unravel(idx);
        let f = |m| 2.0 * PI * self.frequency(m) as f64 / self.length;
        [f(i), f(j), f(l)]
    }

    /// `|k|²` for every mode, Nyquist included.
    pub fn k_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let n = self.points;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    out.push(k[i] * k[i] + k[j] * k[j] + k[l] * k[l]);
                }
            }
        }
        out
    }

    /// True if any axis index of the mode is the Nyquist index.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let n2 = self.points / 2;
        self.unravel(idx).iter().any(|&m| m == n2)
    }

    pub fn ensure_same(&self, other: &Cell) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::CellMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

/// Cached 3-D complex FFT of edge `n` on row-major `n³` arrays.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn for_points(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("fft cache poisoned");
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    fn transform(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "fft buffer has wrong length");
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);

        let mut buf = vec![ZERO; data.len()];
        // axis 1
        for i in 0..n {
            let plane = i * n * n;
            for j in 0..n {
                for l in 0..n {
                    buf[plane + l * n + j] = data[plane + j * n + l];
                }
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            let plane = i * n * n;
            for j in 0..n {
                for l in 0..n {
                    data[plane + j * n + l] = buf[plane + l * n + j];
                }
            }
        }
        // axis 0
        for i in 0..n {
            for j in 0..n {
                let src = (i * n + j) * n;
                for l in 0..n {
                    buf[(j * n + l) * n + i] = data[src + l];
                }
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            for j in 0..n {
                let dst = (i * n + j) * n;
                for l in 0..n {
                    data[dst + l] = buf[(j * n + l) * n + i];
                }
            }
        }
    }

    /// Real space to series coefficients (scaled by `n⁻³`).
    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, &self.forward);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Series coefficients to real space.
    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, &self.inverse);
    }
}

pub(crate) fn forward_real(cell: &Cell, values: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    Fft3::for_points(cell.points()).forward(&mut buf);
    buf
}

pub(crate) fn inverse_to_real(cell: &Cell, mut coeffs: Vec<C64>) -> Vec<f64> {
    Fft3::for_points(cell.points()).inverse(&mut coeffs);
    coeffs.into_iter().map(|v| v.re).collect()
}

/// Real scalar field on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    cell: Cell,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(cell: Cell) -> Self {
        Self {
            values: vec![0.0; cell.len()],
            cell,
        }
    }

    pub fn constant(cell: Cell, value: f64) -> Self {
        Self {
            values: vec![value; cell.len()],
            cell,
        }
    }

    pub fn from_values(cell: Cell, values: Vec<f64>) -> Result<Self> {
        if values.len() != cell.len() {
            return Err(Error::invalid(format!(
                "expected {} values for {cell}, got {}",
                cell.len(),
                values.len()
            )));
        }
        Ok(Self { cell, values })
    }

    pub fn from_fn(cell: Cell, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..cell.len()).map(|idx| f(cell.position(idx))).collect();
        Self { cell, values }
    }

    /// Inverse transform of series coefficients; the imaginary part is dropped.
    pub fn from_fourier(cell: Cell, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != cell.len() {
            return Err(Error::invalid("coefficient array has wrong length"));
        }
        Ok(Self {
            values: inverse_to_real(&cell, coeffs),
            cell,
        })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn fourier(&self) -> Vec<C64> {
        forward_real(&self.cell, &self.values)
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell.dv()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.cell.ensure_same(&other.cell)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.cell.dv())
    }

    /// Grid `L²` norm `(h³ Σ f²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.cell.dv()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            cell: self.cell,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.cell.ensure_same(&other.cell)?;
        Ok(Self {
            cell: self.cell,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.cell.ensure_same(&other.cell)?;
        Ok(Self {
            cell: self.cell,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.cell.ensure_same(&other.cell)?;
        Ok(Self {
            cell: self.cell,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Real vector field with three Cartesian components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn zeros(cell: Cell) -> Self {
        Self {
            components: [ScalarField::zeros(cell), ScalarField::zeros(cell), ScalarField::zeros(cell)],
        }
    }

    pub fn from_components(components: [ScalarField; 3]) -> Result<Self> {
        components[0].cell.ensure_same(&components[1].cell)?;
        components[0].cell.ensure_same(&components[2].cell)?;
        Ok(Self { components })
    }

    pub fn from_fn(cell: Cell, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut comps = [vec![0.0; cell.len()], vec![0.0; cell.len()], vec![0.0; cell.len()]];
        for idx in 0..cell.len() {
            let v = f(cell.position(idx));
            for a in 0..3 {
                comps[a][idx] = v[a];
            }
        }
        let [x, y, z] = comps;
        Self {
            components: [
                ScalarField { cell, values: x },
                ScalarField { cell, values: y },
                ScalarField { cell, values: z },
            ],
        }
    }

    pub fn cell(&self) -> &Cell {
        &self.components[0].cell
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut ScalarField {
        &mut self.components[a]
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [
            self.components[0].values[idx],
            self.components[1].values[idx],
            self.components[2].values[idx],
        ]
    }

    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        let mut s = 0.0;
        for a in 0..3 {
            s += self.components[a].inner(&other.components[a])?;
        }
        Ok(s)
    }

    /// `∫ |v|²` over the cell.
    pub fn square_integral(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.values.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            * self.cell().dv()
    }

    pub fn norm(&self) -> f64 {
        self.square_integral().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            components: [
                self.components[0].scaled(s),
                self.components[1].scaled(s),
                self.components[2].scaled(s),
            ],
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].add(&other.components[0])?,
                self.components[1].add(&other.components[1])?,
                self.components[2].add(&other.components[2])?,
            ],
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].sub(&other.components[0])?,
                self.components[1].sub(&other.components[1])?,
                self.components[2].sub(&other.components[2])?,
            ],
        })
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar_field(&self, f: &ScalarField) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].mul(f)?,
                self.components[1].mul(f)?,
                self.components[2].mul(f)?,
            ],
        })
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> Result<ScalarField> {
        self.cell().ensure_same(other.cell())?;
        let cell = *self.cell();
        let values = (0..cell.len())
            .map(|i| {
                let (a, b) = (self.at(i), other.at(i));
                a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
            })
            .collect();
        ScalarField::from_values(cell, values)
    }

    pub fn magnitude(&self) -> ScalarField {
        let cell = *self.cell();
        let values = (0..cell.len())
            .map(|i| {
                let a = self.at(i);
                (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
            })
            .collect();
        ScalarField { cell, values }
    }

    pub fn fourier(&self) -> [Vec<C64>; 3] {
        [
            self.components[0].fourier(),
            self.components[1].fourier(),
            self.components[2].fourier(),
        ]
    }

    pub fn from_fourier(cell: Cell, coeffs: [Vec<C64>; 3]) -> Result<Self> {
        let [x, y, z] = coeffs;
        Ok(Self {
            components: [
                ScalarField::from_fourier(cell, x)?,
                ScalarField::from_fourier(cell, y)?,
                ScalarField::from_fourier(cell, z)?,
            ],
        })
    }
}

/// Two-component complex spinor field (spin up, spin down).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    cell: Cell,
    up: Vec<C64>,
    down: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(cell: Cell) -> Self {
        Self {
            up: vec![ZERO; cell.len()],
            down: vec![ZERO; cell.len()],
            cell,
        }
    }

    pub fn from_components(cell: Cell, up: Vec<C64>, down: Vec<C64>) -> Result<Self> {
        if up.len() != cell.len() || down.len() != cell.len() {
            return Err(Error::invalid("spinor component has wrong length"));
        }
        Ok(Self { cell, up, down })
    }

    pub fn from_fn(cell: Cell, f: impl Fn([f64; 3]) -> [C64; 2]) -> Self {
        let mut up = Vec::with_capacity(cell.len());
        let mut down = Vec::with_capacity(cell.len());
        for idx in 0..cell.len() {
            let [u, d] = f(cell.position(idx));
            up.push(u);
            down.push(d);
        }
        Self { cell, up, down }
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn up(&self) -> &[C64] {
        &self.up
    }

    pub fn down(&self) -> &[C64] {
        &self.down
    }

    pub fn up_mut(&mut self) -> &mut [C64] {
        &mut self.up
    }

    pub fn down_mut(&mut self) -> &mut [C64] {
        &mut self.down
    }

    pub fn component(&self, s: usize) -> &[C64] {
        if s == 0 {
            &self.up
        } else {
            &self.down
        }
    }

    pub fn component_mut(&mut self, s: usize) -> &mut Vec<C64> {
        if s == 0 {
            &mut self.up
        } else {
            &mut self.down
        }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [C64; 2] {
        [self.up[idx], self.down[idx]]
    }

    /// `⟨self, other⟩ = h³ Σ conj(self)·other`, antilinear in `self`.
    pub fn inner(&self, other: &SpinorField) -> Result<C64> {
        self.cell.ensure_same(&other.cell)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &SpinorField) -> C64 {
        let mut s = ZERO;
        for (a, b) in self.up.iter().zip(&other.up) {
            s += a.conj() * b;
        }
        for (a, b) in self.down.iter().zip(&other.down) {
            s += a.conj() * b;
        }
        s * self.cell.dv()
    }

    pub fn norm_sqr(&self) -> f64 {
        (self.up.iter().map(|v| v.norm_sqr()).sum::<f64>()
            + self.down.iter().map(|v| v.norm_sqr()).sum::<f64>())
            * self.cell.dv()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, s: C64) {
        self.up.iter_mut().for_each(|v| *v *= s);
        self.down.iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: C64, x: &SpinorField) {
        debug_assert_eq!(self.cell, x.cell);
        for (y, v) in self.up.iter_mut().zip(&x.up) {
            *y += a * v;
        }
        for (y, v) in self.down.iter_mut().zip(&x.down) {
            *y += a * v;
        }
    }

    pub fn sub(&self, other: &SpinorField) -> Result<Self> {
        self.cell.ensure_same(&other.cell)?;
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        Ok(out)
    }

    /// Multiply pointwise by a real function.
    pub fn mul_real(&self, f: &[f64]) -> Self {
        Self {
            cell: self.cell,
            up: self.up.iter().zip(f).map(|(v, w)| v * w).collect(),
            down: self.down.iter().zip(f).map(|(v, w)| v * w).collect(),
        }
    }

    /// Pointwise `e^{iθ(x)} ψ(x)`.
    pub fn phase_multiplied(&self, theta: &ScalarField) -> Self {
        let ph: Vec<C64> = theta.values().iter().map(|&t| C64::from_polar(1.0, t)).collect();
        Self {
            cell: self.cell,
            up: self.up.iter().zip(&ph).map(|(v, p)| v * p).collect(),
            down: self.down.iter().zip(&ph).map(|(v, p)| v * p).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.up.iter().chain(&self.down).all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

fn real_field_derivative_coeffs(cell: &Cell, coeffs: &[C64], axis: usize) -> Vec<C64> {
    let k = cell.wavenumbers_real();
    let mut out = Vec::with_capacity(coeffs.len());
    for (idx, c) in coeffs.iter().enumerate() {
        let m = cell.unravel(idx)[axis];
        out.push(C64::new(0.0, k[m]) * c);
    }
    out
}

/// Spectral gradient `∇f`.
pub fn gradient(f: &ScalarField) -> VectorField {
    let cell = *f.cell();
    let c = f.fourier();
    let comps = [0, 1, 2].map(|a| {
        ScalarField::from_fourier(cell, real_field_derivative_coeffs(&cell, &c, a))
            .expect("coefficient length matches cell")
    });
    VectorField { components: comps }
}

/// Spectral divergence `∇·v`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let cell = *v.cell();
    let mut acc = vec![ZERO; cell.len()];
    for a in 0..3 {
        let c = v.components[a].fourier();
        let d = real_field_derivative_coeffs(&cell, &c, a);
        for (s, x) in acc.iter_mut().zip(d) {
            *s += x;
        }
    }
    ScalarField::from_fourier(cell, acc).expect("coefficient length matches cell")
}

/// Spectral curl `∇×v`.
pub fn curl(v: &VectorField) -> VectorField {
    let cell = *v.cell();
    let c = v.fourier();
    let k = cell.wavenumbers_real();
    let mut out = [vec![ZERO; cell.len()], vec![ZERO; cell.len()], vec![ZERO; cell.len()]];
    for idx in 0..cell.len() {
        let [i, j, l] = cell.unravel(idx);
        let kv = [k[i], k[j], k[l]];
        let iu = C64::new(0.0, 1.0);
        out[0][idx] = iu * (kv[1] * c[2][idx] - kv[2] * c[1][idx]);
        out[1][idx] = iu * (kv[2] * c[0][idx] - kv[0] * c[2][idx]);
        out[2][idx] = iu * (kv[0] * c[1][idx] - kv[1] * c[0][idx]);
    }
    VectorField::from_fourier(cell, out).expect("coefficient length matches cell")
}

/// Spectral Laplacian `Δf` (Nyquist included).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let cell = *f.cell();
    let k2 = cell.k_squared();
    let c: Vec<C64> = f.fourier().into_iter().zip(&k2).map(|(c, k)| -c * k).collect();
    ScalarField::from_fourier(cell, c).expect("coefficient length matches cell")
}

/// Coulomb-gauge (transverse) projection `v̂_k - k (k·v̂_k)/|k|²`.
///
/// The `k = 0` mean is kept unless `zero_mean` is set, which implements the
/// periodic gauge constraint `∫_Γ A = 0`.
pub fn helmholtz_project(v: &VectorField, zero_mean: bool) -> VectorField {
    let cell = *v.cell();
    let mut c = v.fourier();
    project_coefficients(&cell, &mut c, zero_mean);
    VectorField::from_fourier(cell, c).expect("coefficient length matches cell")
}

pub(crate) fn project_coefficients(cell: &Cell, c: &mut [Vec<C64>; 3], zero_mean: bool) {
    let k = cell.wavenumbers_real();
    for idx in 0..cell.len() {
        let [i, j, l] = cell.unravel(idx);
        let kv = [k[i], k[j], k[l]];
        let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if idx == 0 {
            if zero_mean {
                for comp in c.iter_mut() {
                    comp[0] = ZERO;
                }
            }
            continue;
        }
        if k2 == 0.0 {
            continue;
        }
        let kdotv = kv[0] * c[0][idx] + kv[1] * c[1][idx] + kv[2] * c[2][idx];
        for a in 0..3 {
            c[a][idx] -= kdotv * (kv[a] / k2);
        }
    }
}

/// Periodic Poisson solve `φ̂_k = 4π ρ̂_k / |k|²`, `φ̂_0 = 0`, so that
/// `-Δφ = 4π(ρ - ρ̄)`.
pub fn poisson_potential(rho: &ScalarField) -> ScalarField {
    let cell = *rho.cell();
    let k2 = cell.k_squared();
    let mut c = rho.fourier();
    c[0] = ZERO;
    for (v, &k) in c.iter_mut().zip(&k2).skip(1) {
        *v *= 4.0 * PI / k;
    }
    ScalarField::from_fourier(cell, c).expect("coefficient length matches cell")
}
