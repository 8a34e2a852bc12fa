#![allow(dead_code)]

use std::f64::consts::PI;

use magrhf_core::fields::Fft3;
use magrhf_core::{Cell, ScalarField, SpinorField, VectorField, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random coefficients on modes with `|f_a| <= band` per axis.
pub fn band_coeffs(cell: &Cell, band: i64, rng: &mut ChaCha8Rng, real: bool) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); cell.len()];
    for fx in -band..=band {
        for fy in -band..=band {
            for fz in -band..=band {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                c[cell.mode_index(fx, fy, fz)] += v;
                if real {
                    c[cell.mode_index(-fx, -fy, -fz)] += v.conj();
                }
            }
        }
    }
    c
}

pub fn band_scalar(cell: &Cell, band: i64, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField::from_fourier(*cell, band_coeffs(cell, band, rng, true)).unwrap()
}

pub fn band_vector(cell: &Cell, band: i64, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::from_components([0, 1, 2].map(|_| band_scalar(cell, band, rng))).unwrap()
}

fn complex_inverse(cell: &Cell, mut c: Vec<C64>) -> Vec<C64> {
    Fft3::for_points(cell.points()).inverse(&mut c);
    c
}

pub fn band_spinor(cell: &Cell, band: i64, rng: &mut ChaCha8Rng) -> SpinorField {
    let up = complex_inverse(cell, band_coeffs(cell, band, rng, false));
    let down = complex_inverse(cell, band_coeffs(cell, band, rng, false));
    SpinorField::from_components(*cell, up, down).unwrap()
}

pub fn random_spinor(cell: &Cell, rng: &mut ChaCha8Rng) -> SpinorField {
    let mut draw = || (0..cell.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>();
    let up = draw();
    let down = draw();
    SpinorField::from_components(*cell, up, down).unwrap()
}

/// Modified Gram-Schmidt in the grid inner product.
pub fn orthonormalise(mut v: Vec<SpinorField>) -> Vec<SpinorField> {
    for i in 0..v.len() {
        for j in 0..i {
            let s = v[j].inner(&v[i]).unwrap();
            let vj = v[j].clone();
            v[i].axpy(-s, &vj);
        }
        let n = v[i].norm();
        v[i].scale(C64::new(1.0 / n, 0.0));
    }
    v
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Dense spectral derivative `p_axis = -i ∂_axis` (Nyquist kept) by an
/// explicit DFT sum.
pub fn dense_momentum(cell: &Cell, axis: usize) -> DMatrix<C64> {
    let n = cell.points();
    let len = cell.len();
    let h = cell.spacing();
    let mut m = DMatrix::from_element(len, len, C64::new(0.0, 0.0));
    for a in 0..len {
        let ia = cell.unravel(a)[axis];
        for b in 0..len {
            let ib = cell.unravel(b)[axis];
            let rest_a = cell.unravel(a);
            let rest_b = cell.unravel(b);
            if (0..3).any(|x| x != axis && rest_a[x] != rest_b[x]) {
                continue;
            }
            let mut s = C64::new(0.0, 0.0);
            for q in 0..n {
                let f = if q < n / 2 { q as f64 } else { q as f64 - n as f64 };
                let k = 2.0 * PI * f / cell.length();
                s += C64::from_polar(k / n as f64, k * (ia as f64 - ib as f64) * h);
            }
            m[(a, b)] = s;
        }
    }
    m
}

/// Dense `½[(p+A)² + σ·B] + V` on `C² ⊗ grid`, with the spin index slowest.
pub fn dense_pauli(cell: &Cell, a: &VectorField, b: &VectorField, v: &ScalarField) -> DMatrix<C64> {
    let len = cell.len();
    let mut pa = Vec::new();
    for ax in 0..3 {
        let mut m = dense_momentum(cell, ax);
        for i in 0..len {
            m[(i, i)] += C64::new(a.component(ax).values()[i], 0.0);
        }
        pa.push(m);
    }
    let mut kin = DMatrix::from_element(len, len, C64::new(0.0, 0.0));
    for m in &pa {
        kin += m * m;
    }
    kin *= C64::new(0.5, 0.0);
    let mut h = DMatrix::from_element(2 * len, 2 * len, C64::new(0.0, 0.0));
    h.view_mut((0, 0), (len, len)).copy_from(&kin);
    h.view_mut((len, len), (len, len)).copy_from(&kin);
    let i = C64::new(0.0, 1.0);
    for p in 0..len {
        let [bx, by, bz] = b.at(p);
        let w = v.values()[p];
        h[(p, p)] += C64::new(0.5 * bz + w, 0.0);
        h[(len + p, len + p)] += C64::new(-0.5 * bz + w, 0.0);
        h[(p, len + p)] += 0.5 * (bx - i * by);
        h[(len + p, p)] += 0.5 * (bx + i * by);
    }
    h
}

pub fn spinor_to_vec(psi: &SpinorField) -> DVector<C64> {
    DVector::from_iterator(2 * psi.cell().len(), psi.up().iter().chain(psi.down()).copied())
}

/// Lowest eigenvalues of a dense Hermitian matrix.
pub fn dense_levels(h: &DMatrix<C64>) -> Vec<f64> {
    let mut l: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    l.sort_by(f64::total_cmp);
    l
}

/// Nuclear potential of Gaussian charges assembled term by term from
/// `-z 4π e^{-k²s²/2} e^{-ik·R} / (|Γ| k²)`.
pub fn nuclear_potential(cell: &Cell, nuclei: &[(f64, [f64; 3])], width: f64) -> Vec<f64> {
    let n = cell.points() as i64;
    let vol = cell.volume();
    let q = 2.0 * PI / cell.length();
    let mut c = vec![C64::new(0.0, 0.0); cell.len()];
    for fx in -n / 2..n / 2 {
        for fy in -n / 2..n / 2 {
            for fz in -n / 2..n / 2 {
                if fx == 0 && fy == 0 && fz == 0 {
                    continue;
                }
                let k = [fx as f64 * q, fy as f64 * q, fz as f64 * q];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let idx = cell.mode_index(fx, fy, fz);
                for &(z, r) in nuclei {
                    let phase = -(k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
                    c[idx] += C64::from_polar(-z * 4.0 * PI / (vol * k2) * (-0.5 * k2 * width * width).exp(), phase);
                }
            }
        }
    }
    complex_inverse(cell, c).into_iter().map(|v| v.re).collect()
}

/// Result of the scalar closed-shell solver.
pub struct ScalarRhf {
    pub energy: f64,
    pub kinetic: f64,
    pub external: f64,
    pub hartree: f64,
    pub level: f64,
    pub iterations: usize,
}

struct Scalar<'a> {
    cell: &'a Cell,
    k2: Vec<f64>,
}

impl Scalar<'_> {
    fn forward(&self, v: &[f64]) -> Vec<C64> {
        let mut c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        Fft3::for_points(self.cell.points()).forward(&mut c);
        c
    }

    fn inverse(&self, c: Vec<C64>) -> Vec<f64> {
        complex_inverse(self.cell, c).into_iter().map(|v| v.re).collect()
    }

    fn kinetic(&self, v: &[f64]) -> Vec<f64> {
        let c = self.forward(v).into_iter().zip(&self.k2).map(|(c, k)| c * (0.5 * k)).collect();
        self.inverse(c)
    }

    fn hartree(&self, rho: &[f64]) -> Vec<f64> {
        let mut c = self.forward(rho);
        c[0] = C64::new(0.0, 0.0);
        for (v, k) in c.iter_mut().zip(&self.k2).skip(1) {
            *v *= 4.0 * PI / k;
        }
        self.inverse(c)
    }

    fn apply(&self, v: &[f64], pot: &[f64]) -> Vec<f64> {
        self.kinetic(v).into_iter().zip(v).zip(pot).map(|((t, x), w)| t + w * x).collect()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.cell.dv()
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let c = self.forward(r).into_iter().zip(&self.k2).map(|(c, k)| c / (1.0 + 0.5 * k)).collect();
        self.inverse(c)
    }

    /// Lowest eigenpair by LOBPCG with a single vector.
    fn lowest(&self, pot: &[f64], mut x: Vec<f64>, tol: f64) -> (f64, Vec<f64>) {
        let nx = self.dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let mut p: Option<Vec<f64>> = None;
        let mut theta = 0.0;
        for _ in 0..500 {
            let hx = self.apply(&x, pot);
            theta = self.dot(&x, &hx);
            let r: Vec<f64> = hx.iter().zip(&x).map(|(h, v)| h - theta * v).collect();
            if self.dot(&r, &r).sqrt() < tol {
                break;
            }
            let w = self.precondition(&r);
            let mut basis = vec![x.clone(), w];
            if let Some(p) = &p {
                basis.push(p.clone());
            }
            let m = basis.len();
            let hb: Vec<Vec<f64>> = basis.iter().map(|b| self.apply(b, pot)).collect();
            let mut s = DMatrix::zeros(m, m);
            let mut hm = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    s[(i, j)] = self.dot(&basis[i], &basis[j]);
                    hm[(i, j)] = self.dot(&basis[i], &hb[j]);
                }
            }
            let hm = 0.5 * (&hm + hm.transpose());
            let s = 0.5 * (&s + s.transpose());
            // S^{-1/2} H S^{-1/2}
            let se = s.clone().symmetric_eigen();
            let keep: Vec<usize> = (0..m).filter(|&i| se.eigenvalues[i] > 1e-14 * se.eigenvalues.max()).collect();
            let mut t = DMatrix::zeros(m, keep.len());
            for (c, &i) in keep.iter().enumerate() {
                let col = se.eigenvectors.column(i) / se.eigenvalues[i].sqrt();
                t.set_column(c, &col);
            }
            let red = t.transpose() * &hm * &t;
            let re = red.symmetric_eigen();
            let lo = (0..re.eigenvalues.len()).min_by(|&a, &b| re.eigenvalues[a].total_cmp(&re.eigenvalues[b])).unwrap();
            let y = &t * re.eigenvectors.column(lo);
            let mut nxv = vec![0.0; x.len()];
            let mut np = vec![0.0; x.len()];
            for i in 0..m {
                for (k, b) in basis[i].iter().enumerate() {
                    nxv[k] += y[i] * b;
                    if i > 0 {
                        np[k] += y[i] * b;
                    }
                }
            }
            let nn = self.dot(&nxv, &nxv).sqrt();
            x = nxv.into_iter().map(|v| v / nn).collect();
            let pn = self.dot(&np, &np).sqrt();
            p = if pn > 0.0 { Some(np.into_iter().map(|v| v / pn).collect()) } else { None };
        }
        (theta, x)
    }
}

/// Closed-shell spinless rHF: one spatial orbital carrying two electrons,
/// solved by damped density iteration.
pub fn scalar_rhf(cell: &Cell, nuclei: &[(f64, [f64; 3])], width: f64, tol: f64) -> ScalarRhf {
    let s = Scalar {
        cell,
        k2: cell.k_squared(),
    };
    let v_ext = nuclear_potential(cell, nuclei, width);
    let (z, r0) = nuclei[0];
    let mut x = ScalarField::from_fn(*cell, |x| {
        let d = cell.displacement(x, r0);
        (-z * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()).exp()
    })
    .into_values();
    let mut rho: Vec<f64> = x.iter().map(|v| v * v).collect();
    let mass = rho.iter().sum::<f64>() * cell.dv();
    rho.iter_mut().for_each(|v| *v *= 2.0 / mass);
    let mut level = 0.0;
    let mut iterations = 0;
    for it in 1..=200 {
        iterations = it;
        let vh = s.hartree(&rho);
        let pot: Vec<f64> = v_ext.iter().zip(&vh).map(|(a, b)| a + b).collect();
        let (l, y) = s.lowest(&pot, x, 1e-11);
        level = l;
        x = y;
        let out: Vec<f64> = x.iter().map(|v| 2.0 * v * v).collect();
        let diff = out.iter().zip(&rho).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() * cell.dv().sqrt();
        if diff < tol {
            rho = out;
            break;
        }
        rho = rho.iter().zip(&out).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
    }
    let kinetic = 2.0 * s.dot(&x, &s.kinetic(&x));
    let external = s.dot(&v_ext, &rho);
    let hartree = 0.5 * s.dot(&rho, &s.hartree(&rho));
    ScalarRhf {
        energy: kinetic + external + hartree,
        kinetic,
        external,
        hartree,
        level,
        iterations,
    }
}
