//! WebAssembly bindings for the demo page in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub struct TrainingSession {
    inner: demo::Session,
}

#[wasm_bindgen]
impl TrainingSession {
    #[wasm_bindgen(constructor)]
    pub fn new(problem: &str, mode: &str, seed: u32) -> Result<TrainingSession, JsError> {
        demo::Session::new(problem, mode, seed as u64).map(|inner| Self { inner }).map_err(js)
    }

    /// Trains up to `epochs` epochs; returns the latest physics loss.
    pub fn step(&mut self, epochs: u32) -> Result<f64, JsError> {
        self.inner.step(epochs as usize).map_err(js)
    }

    pub fn epoch(&self) -> u32 {
        self.inner.epoch() as u32
    }

    /// Termination reason, or `undefined` while training can continue.
    pub fn finished(&self) -> Option<String> {
        self.inner.finished().map(str::to_string)
    }

    pub fn losses(&self) -> Vec<f64> {
        self.inner.losses()
    }

    pub fn nrmse(&mut self) -> Result<f64, JsError> {
        self.inner.nrmse().map_err(js)
    }

    #[wasm_bindgen(js_name = errorGrid)]
    pub fn error_grid(&self, resolution: u32) -> Result<Vec<f64>, JsError> {
        self.inner.error_grid(resolution as usize).map_err(js)
    }
}

/// New weights, then the hard-point mass and step size.
#[wasm_bindgen]
pub fn reweight(weights: &[f64], errors: &[f64], q: f64, e: f64) -> Result<Vec<f64>, JsError> {
    demo::reweight(weights, errors, q, e).map_err(js)
}

/// Unit-square Latin hypercube sample as `x0, y0, x1, y1, …`.
#[wasm_bindgen]
pub fn lhs(n: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    demo::lhs(n as usize, seed as u64).map_err(js)
}
