use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::rng::stream_rng;

/// Output head activation. Hidden layers always use `tanh`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Sigmoid,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    #[default]
    GlorotUniform,
    HeNormal,
}

/// Shape of a fully connected tanh network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub output_activation: Activation,
}

/// One affine layer inside the flat parameter vector. Weights are stored
/// row-major as `fan_out × fan_in`, followed by `fan_out` biases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    pub offset: usize,
}

impl LayerShape {
    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.fan_in * self.fan_out
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.fan_in * self.fan_out;
        start..start + self.fan_out
    }

    pub fn len(&self) -> usize {
        (self.fan_in + 1) * self.fan_out
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl MlpSpec {
    /// `layers` hidden layers of `nodes` units each.
    pub fn new(
        input_dim: usize,
        layers: usize,
        nodes: usize,
        output_dim: usize,
        output_activation: Activation,
    ) -> Result<Self> {
        let spec = Self { input_dim, hidden: vec![nodes; layers], output_dim, output_activation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return arg("network input and output widths must be at least 1");
        }
        if self.hidden.contains(&0) {
            return arg("hidden layer widths must be at least 1");
        }
        Ok(())
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_dim);
        widths.extend_from_slice(&self.hidden);
        widths.push(self.output_dim);
        let mut offset = 0;
        widths
            .windows(2)
            .map(|w| {
                let l = LayerShape { fan_in: w[0], fan_out: w[1], offset };
                offset += l.len();
                l
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(LayerShape::len).sum()
    }
}

/// Flat parameter storage for one [`MlpSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub layout: Vec<LayerShape>,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(spec: &MlpSpec) -> Self {
        Self { layout: spec.layers(), values: vec![0.0; spec.param_count()] }
    }

    pub fn from_values(spec: &MlpSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.param_count() {
            return arg(format!(
                "parameter vector has {} entries, network needs {}",
                values.len(),
                spec.param_count()
            ));
        }
        Ok(Self { layout: spec.layers(), values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_against(&self, spec: &MlpSpec) -> Result<()> {
        if self.layout != spec.layers() || self.values.len() != spec.param_count() {
            return arg("parameter layout does not match the network description");
        }
        Ok(())
    }
}

/// Glorot-uniform weights, zero biases.
pub fn xavier_init(spec: &MlpSpec, seed: u64) -> ParamVector {
    init_params(spec, InitScheme::GlorotUniform, seed, crate::rng::streams::GENERATOR_INIT)
}

/// Initializes every layer with `scheme` from a seeded stream; biases are zero.
pub fn init_params(spec: &MlpSpec, scheme: InitScheme, seed: u64, stream: u64) -> ParamVector {
    let mut rng = stream_rng(seed, stream);
    let mut p = ParamVector::zeros(spec);
    for layer in spec.layers() {
        let w = &mut p.values[layer.weight_range()];
        match scheme {
            InitScheme::GlorotUniform => {
                let b = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
                for v in w.iter_mut() {
                    *v = rng.random_range(-b..=b);
                }
            }
            InitScheme::HeNormal => {
                let normal = Normal::new(0.0, (2.0 / layer.fan_in as f64).sqrt())
                    .expect("positive standard deviation");
                for v in w.iter_mut() {
                    *v = normal.sample(&mut rng);
                }
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_layer_sum() {
        let spec = MlpSpec::new(2, 4, 100, 1, Activation::Linear).unwrap();
        assert_eq!(spec.param_count(), 3 * 100 + 3 * 101 * 100 + 101);
        let layers = spec.layers();
        assert_eq!(layers.len(), 5);
        assert_eq!(layers[1].offset, 300);
        assert!(MlpSpec::new(0, 1, 3, 1, Activation::Linear).is_err());
        assert!(MlpSpec::new(2, 1, 0, 1, Activation::Linear).is_err());
    }

    #[test]
    fn glorot_bound_and_zero_bias() {
        let spec = MlpSpec::new(20, 2, 20, 1, Activation::Linear).unwrap();
        let p = xavier_init(&spec, 7);
        let mid = spec.layers()[1];
        let b = (6.0f64 / 40.0).sqrt();
        assert!((b - 0.387298).abs() < 1e-6);
        assert!(p.values[mid.weight_range()].iter().all(|w| w.abs() <= b));
        for l in spec.layers() {
            assert!(p.values[l.bias_range()].iter().all(|&v| v == 0.0));
        }
        assert_eq!(p, xavier_init(&spec, 7));
        assert_ne!(p, xavier_init(&spec, 8));
    }

    #[test]
    fn glorot_variance_matches_uniform_law() {
        let spec = MlpSpec::new(100, 2, 200, 1, Activation::Linear).unwrap();
        let p = xavier_init(&spec, 11);
        for l in spec.layers().iter().filter(|l| l.fan_in >= 100 && l.fan_out >= 100) {
            let w = &p.values[l.weight_range()];
            let n = w.len() as f64;
            let mean = w.iter().sum::<f64>() / n;
            let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let b2 = 6.0 / (l.fan_in + l.fan_out) as f64;
            assert!((var / (b2 / 3.0) - 1.0).abs() < 0.2, "variance {var} vs {}", b2 / 3.0);
        }
    }

    #[test]
    fn he_normal_scale() {
        let spec = MlpSpec::new(200, 1, 200, 1, Activation::Linear).unwrap();
        let p = init_params(&spec, InitScheme::HeNormal, 3, 1);
        let l = spec.layers()[1];
        let w = &p.values[l.weight_range()];
        let var = w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
        assert!((var / (2.0 / 200.0) - 1.0).abs() < 0.2);
    }
}
