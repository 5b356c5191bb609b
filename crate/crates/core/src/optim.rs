//! Adam and mini-batch index sampling.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::rng::{stream_rng, streams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moment estimates for one optimization target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(n: usize, lr: f64) -> Self {
        Self::with_config(n, lr, AdamConfig::default())
    }

    pub fn with_config(n: usize, lr: f64, config: AdamConfig) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr, config }
    }

    /// One bias-corrected update `θ ← θ − lr·m̂/(√v̂ + ε)` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return arg(format!(
                "Adam state has {} slots, got {} params and {} gradient entries",
                self.m.len(),
                params.len(),
                grad.len()
            ));
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("gradient entry {i} is {}", grad[i])));
        }
        let AdamConfig { beta1, beta2, eps } = self.config;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// `min(b, n)` distinct indices below `n`, fresh per `(seed, step)`.
pub fn minibatch_indices(n: usize, b: usize, seed: u64, step: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return arg("cannot draw a mini-batch from an empty set");
    }
    if b == 0 {
        return arg("mini-batch size must be positive");
    }
    let mut rng = stream_rng(seed, (streams::MINIBATCH << 32) | (step & 0xffff_ffff));
    Ok(index::sample(&mut rng, n, b.min(n)).into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_gradient_keeps_params() {
        let mut s = AdamState::new(3, 0.01);
        let mut p = vec![1.0, -2.0, 0.5];
        s.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_steps_move_by_lr() {
        let mut s = AdamState::new(1, 0.001);
        let mut p = vec![0.0];
        s.step(&mut p, &[1.0]).unwrap();
        assert!((p[0] + 0.001 / (1.0 + 1e-8)).abs() < 1e-18);
        let before = p[0];
        s.step(&mut p, &[1.0]).unwrap();
        assert!(((before - p[0]) - 0.001).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut s = AdamState::new(3, 0.01);
        let err = s.step(&mut [0.0; 3], &[0.0, f64::NAN, 1.0]).unwrap_err();
        assert!(matches!(&err, Error::Numeric(m) if m.contains("entry 1")), "{err}");
        assert!(s.step(&mut [0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn converges_on_a_parabola() {
        let mut s = AdamState::new(1, 0.001);
        let mut p = vec![1.0];
        for _ in 0..2000 {
            let g = [2.0 * p[0]];
            s.step(&mut p, &g).unwrap();
        }
        assert!(p[0].abs() < 0.1, "{}", p[0]);
    }

    #[test]
    fn minibatch_examples() {
        let mut all = minibatch_indices(3, 256, 1, 0).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        let mut b = minibatch_indices(1000, 256, 1, 0).unwrap();
        assert_eq!(b, minibatch_indices(1000, 256, 1, 0).unwrap());
        assert_ne!(b, minibatch_indices(1000, 256, 1, 1).unwrap());
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 256);
        assert!(minibatch_indices(0, 4, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn first_step_descends(grad in prop::collection::vec(-10.0f64..10.0, 1..20), lr in 1e-5f64..1.0) {
            let mut s = AdamState::new(grad.len(), lr);
            let start = vec![0.5; grad.len()];
            let mut p = start.clone();
            s.step(&mut p, &grad).unwrap();
            let dot: f64 = p.iter().zip(&start).zip(&grad).map(|((a, b), g)| (a - b) * g).sum();
            prop_assert!(dot <= 0.0);
            prop_assert!(s.v.iter().all(|&v| v >= 0.0));
        }
    }
}
