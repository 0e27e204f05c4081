//! Browser bindings for the demo page in `www/`.
//!
//! Every export is a thin wrapper around a plain function in [`demo`], so
//! the numerics are testable natively. Results cross the boundary as flat
//! `Float64Array`s; the layout of each is documented on the wrapper.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js(e: mpmr_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// ESS for `offers` with `responders` responders. Returns `3K + 1` values:
/// the visit probabilities, the proposer payoffs, the responder payoffs
/// (one per proposer, as seen by a responder visiting it), and
/// the common responder payoff.
#[wasm_bindgen]
pub fn ess_explore(offers: &[f64], responders: u32) -> Result<Vec<f64>, JsValue> {
    demo::ess_explore(offers, responders as usize)
        .map(|r| r.flatten())
        .map_err(to_js)
}

/// Replicator field on a lattice with `resolution` points per edge.
/// Returns `6` values per point: `x1, x2, x3, dx1, dx2, dx3`.
#[wasm_bindgen]
pub fn replicator_field(s: f64, delta: f64, resolution: u32) -> Result<Vec<f64>, JsValue> {
    demo::replicator_field(s, delta, resolution as usize).map_err(to_js)
}

/// Trajectory from `(x1, x2, 1 - x1 - x2)`, sampled `samples` times.
/// Returns `3` values per sample followed by the final distance to the
/// equilibrium line.
#[wasm_bindgen]
pub fn replicator_trajectory(
    s: f64,
    delta: f64,
    x1: f64,
    x2: f64,
    t_end: f64,
    samples: u32,
) -> Result<Vec<f64>, JsValue> {
    demo::replicator_trajectory(s, delta, x1, x2, t_end, samples as usize).map_err(to_js)
}

/// Symmetric offers for `K = 2..=k_max` at fixed `responders`.
#[wasm_bindgen]
pub fn spne_curve(k_max: u32, responders: u32) -> Result<Vec<f64>, JsValue> {
    demo::spne_curve(k_max as usize, responders as usize).map_err(to_js)
}

/// Limit curves over `steps` ratios between `c_min` and `c_max`
/// (geometric spacing). Returns `4` values per ratio: `c`, offer,
/// proposer payoff, responder payoff.
#[wasm_bindgen]
pub fn limit_curve(c_min: f64, c_max: f64, steps: u32) -> Result<Vec<f64>, JsValue> {
    demo::limit_curve(c_min, c_max, steps as usize).map_err(to_js)
}
