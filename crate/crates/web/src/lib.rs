//! WebAssembly bindings for the static demo page in `www/`.

use magrhf_core::tf::{tf_minimize, TfConfig};
use magrhf_core::zero_modes::{alpha_c_from_beta, beta_rank1_upper_bound, dilate, instability_scan, loss_yau};
use wasm_bindgen::prelude::*;

fn js_err(e: magrhf_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `|Ψ|²` and `|B|` of the dilated zero mode on the plane `x₂ = 0`,
/// sampled on `n × n` points of `[-half, half]²`; the two images are
/// concatenated row-major.
#[wasm_bindgen]
pub fn zero_mode_slice(n: usize, half: f64, lambda: f64) -> Result<Vec<f64>, JsValue> {
    if n < 2 || !(half > 0.0) {
        return Err(JsValue::from_str("need n >= 2 and half > 0"));
    }
    let fam = dilate(&loss_yau([0.0, 0.0, 1.0]).map_err(js_err)?, lambda).map_err(js_err)?;
    let mut out = vec![0.0; 2 * n * n];
    let step = 2.0 * half / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            let x = [-half + j as f64 * step, 0.0, half - i as f64 * step];
            let p = fam.psi(x);
            let b = fam.b(x);
            out[i * n + j] = p[0].norm_sqr() + p[1].norm_sqr();
            out[n * n + i * n + j] = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        }
    }
    Ok(out)
}

/// Upper bound on the critical coupling for one electron around charge `z`.
#[wasm_bindgen]
pub fn alpha_c_upper(z: f64) -> Result<f64, JsValue> {
    let fam = loss_yau([0.0, 0.0, 1.0]).map_err(js_err)?;
    let (_, beta) = beta_rank1_upper_bound(z, 1.0, &fam).map_err(js_err)?;
    alpha_c_from_beta(beta).map_err(js_err)
}

/// Energies of the optimal rank-1 zero mode along `λ = 1..=steps` at
/// `α = factor·α_c`, followed by the closed-form slope.
#[wasm_bindgen]
pub fn instability_curve(z: f64, factor: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    let fam = loss_yau([0.0, 0.0, 1.0]).map_err(js_err)?;
    let alpha = factor * alpha_c_upper(z)?;
    let lambdas: Vec<f64> = (1..=steps.max(2)).map(|l| l as f64).collect();
    let scan = instability_scan(z, 1.0, alpha, &lambdas, &fam).map_err(js_err)?;
    let mut out = scan.energies;
    out.push(scan.closed_form_slope);
    Ok(out)
}

/// Thomas–Fermi minimiser on a log grid of `points` radii: returns
/// `[I_TF, r₀, ρ₀, r₁, ρ₁, …]` thinned to at most 200 samples.
#[wasm_bindgen]
pub fn tf_profile(points: usize) -> Result<Vec<f64>, JsValue> {
    let cfg = TfConfig {
        points: points.max(64),
        ..TfConfig::default()
    };
    let sol = tf_minimize(&cfg.grid().map_err(js_err)?, &cfg).map_err(js_err)?;
    let grid = sol.density.grid();
    let stride = (grid.len() / 200).max(1);
    let mut out = vec![sol.energy];
    for (i, (r, p)) in grid.radii().iter().zip(sol.density.values()).enumerate() {
        if i % stride == 0 && *r > 1e-3 && *r < 50.0 {
            out.push(*r);
            out.push(*p);
        }
    }
    Ok(out)
}
