//! Linear and Anderson mixing for the `(ρ, A)` fixed point.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Anderson (Pulay) mixer with per-entry damping.
///
/// With `depth == 0` it reduces to damped linear mixing
/// `x ← x + θ ⊙ (g(x) - x)`.
#[derive(Clone, Debug)]
pub struct AndersonMixer {
    depth: usize,
    history: VecDeque<(Vec<f64>, Vec<f64>)>,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

impl AndersonMixer {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            history: VecDeque::new(),
            last: None,
        }
    }

    pub fn reset(&mut self) {
        self.history.clear();
        self.last = None;
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Next input given the current input `x`, its image `gx` and damping
    /// factors `theta` (same length as `x`).
    pub fn step(&mut self, x: &[f64], gx: &[f64], theta: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = gx.iter().zip(x).map(|(g, x)| g - x).collect();
        if self.depth == 0 {
            return x.iter().zip(&f).zip(theta).map(|((x, f), t)| x + t * f).collect();
        }
        if let Some((px, pf)) = self.last.take() {
            let dx: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
            let df: Vec<f64> = f.iter().zip(&pf).map(|(a, b)| a - b).collect();
            self.history.push_back((dx, df));
            while self.history.len() > self.depth {
                self.history.pop_front();
            }
        }
        self.last = Some((x.to_vec(), f.clone()));

        let k = self.history.len();
        let gamma = if k == 0 {
            DVector::zeros(0)
        } else {
            let n = x.len();
            let df = DMatrix::from_fn(n, k, |i, j| self.history[j].1[i]);
            let rhs = DVector::from_column_slice(&f);
            let mut normal = df.transpose() * &df;
            let scale = (0..k).map(|i| normal[(i, i)]).fold(0.0, f64::max);
            for i in 0..k {
                normal[(i, i)] += 1e-12 * scale.max(1e-300);
            }
            let b = df.transpose() * rhs;
            match normal.clone().cholesky() {
                Some(ch) => ch.solve(&b),
                None => normal.svd(true, true).solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(k)),
            }
        };

        let mut out: Vec<f64> = x.iter().zip(&f).zip(theta).map(|((x, f), t)| x + t * f).collect();
        for (j, (dx, df)) in self.history.iter().enumerate() {
            let g = gamma[j];
            for i in 0..out.len() {
                out[i] -= g * (dx[i] + theta[i] * df[i]);
            }
        }
        out
    }
}
