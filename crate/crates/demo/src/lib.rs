//! WebAssembly bindings for the static page in `www/`. Every operation works
//! on the doubling map with potential `−log 2 + a·sin(2πx)` and returns a flat
//! `Float64Array`.

pub mod ops;

use wasm_bindgen::prelude::*;

fn js<T>(r: Result<T, ics_transfer::Error>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// `[w₁(0..=n), bound(0..=n), λ_emp, C, λ]` for the Diracs at `x` and `y`.
#[wasm_bindgen]
pub fn contraction_curve(amplitude: f64, x: f64, y: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(ops::contraction_curve(amplitude, x, y, n).map(|c| c.flatten()))
}

/// Gibbs-measure mass per bin of `[0,1)`, followed by the iteration count.
#[wasm_bindgen]
pub fn gibbs_histogram(amplitude: f64, bins: usize, tol: f64) -> Result<Vec<f64>, JsError> {
    js(ops::gibbs_histogram(amplitude, bins, tol).map(|h| {
        let mut v = h.mass;
        v.push(h.iterations as f64);
        v
    }))
}

/// `[ρ, h(0), h(1/n), …, h((n−1)/n)]`.
#[wasm_bindgen]
pub fn eigenfunction(amplitude: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(ops::eigenfunction(amplitude, n).map(|(rho, h)| std::iter::once(rho).chain(h).collect()))
}
