//! Block eigensolver (LOBPCG) for the lowest eigenpairs of a Hermitian
//! operator acting on spinor fields.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{Cell, Fft3, SpinorField, C64};
use crate::parallel;

const ZERO: C64 = C64::new(0.0, 0.0);
const DROP_TOL: f64 = 1e-11;
const REFRESH_EVERY: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative residual `‖Hφ - λφ‖ / max(1, |λ|)` required for convergence.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Extra block vectors beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iter: 400,
            guard: 2,
            seed: 0,
        }
    }
}

/// Lowest eigenpairs, ascending.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub levels: Vec<f64>,
    pub orbitals: Vec<SpinorField>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// Guard vectors of the final block, useful for warm restarts.
    pub guard_vectors: Vec<SpinorField>,
}

impl EigenResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// All block vectors (requested, then guard) for a warm restart.
    pub fn block(&self) -> Vec<SpinorField> {
        self.orbitals.iter().chain(&self.guard_vectors).cloned().collect()
    }
}

fn gram(a: &[SpinorField], b: &[SpinorField]) -> DMatrix<C64> {
    let mut g = DMatrix::from_element(a.len(), b.len(), ZERO);
    for i in 0..a.len() {
        for j in 0..b.len() {
            g[(i, j)] = a[i].inner_unchecked(&b[j]);
        }
    }
    g
}

fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// `out_c = Σ_j basis_j · coeffs[(j, c)]`.
fn combine(cell: &Cell, basis: &[&SpinorField], coeffs: &DMatrix<C64>) -> Vec<SpinorField> {
    (0..coeffs.ncols())
        .map(|c| {
            let mut out = SpinorField::zeros(*cell);
            for (j, b) in basis.iter().enumerate() {
                let w = coeffs[(j, c)];
                if w != ZERO {
                    out.axpy(w, b);
                }
            }
            out
        })
        .collect()
}

/// Sorted eigen decomposition of a Hermitian matrix.
fn eigh(m: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::from_element(n, n, ZERO);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}

/// Coefficients `C` with `C* G C = I` spanning the numerically independent
/// part of a Gram matrix (SVQB).
fn svqb(g: &DMatrix<C64>) -> DMatrix<C64> {
    let n = g.nrows();
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)].re.max(1e-300).sqrt().recip()).collect();
    let mut scaled = g.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= d[i] * d[j];
        }
    }
    hermitize(&mut scaled);
    let (vals, vecs) = eigh(scaled);
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > DROP_TOL * max).collect();
    let mut c = DMatrix::from_element(n, keep.len(), ZERO);
    for (col, &k) in keep.iter().enumerate() {
        let s = vals[k].sqrt().recip();
        for i in 0..n {
            c[(i, col)] = vecs[(i, k)] * (d[i] * s);
        }
    }
    c
}

fn precondition(psi: &SpinorField) -> SpinorField {
    let cell = *psi.cell();
    let fft = Fft3::for_points(cell.points());
    let k2 = cell.k_squared();
    let mut out = psi.clone();
    for s in 0..2 {
        let buf = out.component_mut(s);
        fft.forward(buf);
        for (v, kk) in buf.iter_mut().zip(&k2) {
            *v /= 1.0 + 0.5 * kk;
        }
        fft.inverse(buf);
    }
    out
}

fn random_spinor(cell: &Cell, rng: &mut ChaCha8Rng) -> SpinorField {
    let mut f = SpinorField::zeros(*cell);
    for s in 0..2 {
        for v in f.component_mut(s).iter_mut() {
            *v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    // smooth so the start lies mostly in the low-frequency subspace
    let f = precondition(&precondition(&f));
    let n = f.norm();
    f.scaled(C64::new(1.0 / n, 0.0))
}

/// Orthonormal block of `m` vectors built from `initial`, completed with
/// seeded random vectors.
fn starting_block(cell: &Cell, initial: &[SpinorField], m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<SpinorField>> {
    let mut vecs: Vec<SpinorField> = initial
        .iter()
        .filter(|v| v.cell() == cell && v.norm() > 0.0 && v.is_finite())
        .take(m)
        .cloned()
        .collect();
    for _ in 0..8 {
        while vecs.len() < m {
            vecs.push(random_spinor(cell, rng));
        }
        let c = svqb(&gram(&vecs, &vecs));
        let refs: Vec<&SpinorField> = vecs.iter().collect();
        vecs = combine(cell, &refs, &c);
        if vecs.len() >= m {
            vecs.truncate(m);
            return Ok(vecs);
        }
    }
    Err(Error::Domain("could not build an independent starting block".into()))
}

fn apply_all<F>(apply_h: &F, vs: &[SpinorField]) -> Vec<SpinorField>
where
    F: Fn(&SpinorField) -> SpinorField + Sync,
{
    parallel::map(vs, apply_h)
}

/// Lowest `count` eigenpairs of `apply_h` by LOBPCG with soft locking.
///
/// `initial` vectors (e.g. orbitals of a previous solve) seed the block.
/// On non-convergence the best result so far is returned inside
/// [`Error::EigenNotConverged`].
pub fn eigensolve<F>(
    cell: &Cell,
    apply_h: F,
    count: usize,
    initial: &[SpinorField],
    opts: &EigenOptions,
) -> Result<EigenResult>
where
    F: Fn(&SpinorField) -> SpinorField + Sync,
{
    let dim = 2 * cell.len();
    if count == 0 {
        return Err(Error::invalid("eigensolve: count must be positive"));
    }
    let m = (count + opts.guard).min(dim);
    if count > m {
        return Err(Error::invalid(format!("eigensolve: {count} states requested but dimension is {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = starting_block(cell, initial, m, &mut rng)?;
    let mut hx = apply_all(&apply_h, &x);

    // initial Rayleigh-Ritz
    let mut hm = gram(&x, &hx);
    hermitize(&mut hm);
    let (mut theta, z) = eigh(hm);
    {
        let xr: Vec<&SpinorField> = x.iter().collect();
        let hr: Vec<&SpinorField> = hx.iter().collect();
        let (nx, nhx) = (combine(cell, &xr, &z), combine(cell, &hr, &z));
        x = nx;
        hx = nhx;
    }

    let mut p: Vec<SpinorField> = Vec::new();
    let mut hp: Vec<SpinorField> = Vec::new();
    let mut residuals = vec![f64::INFINITY; m];
    let mut iterations = 0;

    loop {
        let r: Vec<SpinorField> = (0..m)
            .map(|i| {
                let mut ri = hx[i].clone();
                ri.axpy(C64::new(-theta[i], 0.0), &x[i]);
                ri
            })
            .collect();
        for i in 0..m {
            residuals[i] = r[i].norm() / theta[i].abs().max(1.0);
        }
        let converged = residuals[..count].iter().all(|&v| v <= opts.tolerance);
        if converged || iterations >= opts.max_iter {
            // confirm against a fresh application of H
            hx = apply_all(&apply_h, &x);
            let mut fresh = vec![0.0; m];
            for i in 0..m {
                let mut ri = hx[i].clone();
                let t = x[i].inner_unchecked(&hx[i]).re;
                theta[i] = t;
                ri.axpy(C64::new(-t, 0.0), &x[i]);
                fresh[i] = ri.norm() / t.abs().max(1.0);
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
            theta = order.iter().map(|&i| theta[i]).collect();
            residuals = order.iter().map(|&i| fresh[i]).collect();
            let mut slots: Vec<Option<SpinorField>> = x.into_iter().map(Some).collect();
            x = order.iter().map(|&i| slots[i].take().expect("permutation")).collect();
            let ok = residuals[..count].iter().all(|&v| v <= opts.tolerance);
            if ok || iterations >= opts.max_iter {
                let mut guard_vectors = x.split_off(count);
                guard_vectors.truncate(m - count);
                let result = EigenResult {
                    levels: theta[..count].to_vec(),
                    orbitals: x,
                    residuals: residuals[..count].to_vec(),
                    iterations,
                    guard_vectors,
                };
                if ok {
                    return Ok(result);
                }
                return Err(Error::EigenNotConverged {
                    iterations,
                    max_residual: result.max_residual(),
                    best: Box::new(result),
                });
            }
        }
        iterations += 1;

        let active: Vec<usize> = (0..m).filter(|&i| residuals[i] > opts.tolerance).collect();
        let w: Vec<SpinorField> = active.iter().map(|&i| precondition(&r[i])).collect();
        let hw = apply_all(&apply_h, &w);
        let (pa, hpa): (Vec<SpinorField>, Vec<SpinorField>) = if p.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            active.iter().map(|&i| (p[i].clone(), hp[i].clone())).unzip()
        };

        let s: Vec<&SpinorField> = x.iter().chain(&w).chain(&pa).collect();
        let hs: Vec<&SpinorField> = hx.iter().chain(&hw).chain(&hpa).collect();
        let ns = s.len();
        let mut g = DMatrix::from_element(ns, ns, ZERO);
        let mut h = DMatrix::from_element(ns, ns, ZERO);
        for i in 0..ns {
            for j in 0..=i {
                g[(i, j)] = s[i].inner_unchecked(s[j]);
                g[(j, i)] = g[(i, j)].conj();
                h[(i, j)] = s[i].inner_unchecked(hs[j]);
                h[(j, i)] = s[j].inner_unchecked(hs[i]);
            }
        }
        hermitize(&mut h);
        let c = svqb(&g);
        if c.ncols() < m {
            // basis collapsed; restart the search directions
            p.clear();
            hp.clear();
            continue;
        }
        let mut hr = c.adjoint() * &h * &c;
        hermitize(&mut hr);
        let (_, z) = eigh(hr);
        let y = &c * z.columns(0, m);

        let nx = combine(cell, &s, &y);
        let nhx = combine(cell, &hs, &y);
        let mut y_rest = y.clone();
        for i in 0..m {
            for col in 0..m {
                y_rest[(i, col)] = ZERO;
            }
        }
        p = combine(cell, &s, &y_rest);
        hp = combine(cell, &hs, &y_rest);
        x = nx;
        hx = nhx;

        // Löwdin re-orthonormalisation keeps X orthonormal to roundoff
        let gx = gram(&x, &x);
        let (gv, gz) = eigh({
            let mut t = gx;
            hermitize(&mut t);
            t
        });
        if gv.iter().any(|v| (v - 1.0).abs() > 1e-13) {
            let mut inv_sqrt = DMatrix::from_element(m, m, ZERO);
            for k in 0..m {
                inv_sqrt[(k, k)] = C64::new(gv[k].max(1e-300).sqrt().recip(), 0.0);
            }
            let t = &gz * inv_sqrt * gz.adjoint();
            let xr: Vec<&SpinorField> = x.iter().collect();
            let hr: Vec<&SpinorField> = hx.iter().collect();
            let (nx, nhx) = (combine(cell, &xr, &t), combine(cell, &hr, &t));
            x = nx;
            hx = nhx;
        }
        if iterations % REFRESH_EVERY == 0 {
            hx = apply_all(&apply_h, &x);
        }
        let mut rr = gram(&x, &hx);
        hermitize(&mut rr);
        let (vals, z) = eigh(rr);
        let xr: Vec<&SpinorField> = x.iter().collect();
        let hr: Vec<&SpinorField> = hx.iter().collect();
        let (nx, nhx) = (combine(cell, &xr, &z), combine(cell, &hr, &z));
        x = nx;
        hx = nhx;
        theta = vals;
    }
}
