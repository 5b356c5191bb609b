//! Dense tanh networks: layer description, flat parameter storage,
//! initialization, point-wise forward passes and the batched jet engine
//! used during training.

mod batch;
mod checkpoint;
mod forward;
mod spec;

pub use batch::{BatchEngine, JetOutput, JetPlan};
pub use checkpoint::Checkpoint;
pub use forward::{forward, forward_dual, forward_generic};
pub use spec::{xavier_init, init_params, Activation, InitScheme, LayerShape, MlpSpec, ParamVector};

/// A network together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: ParamVector,
}

impl Mlp {
    pub fn new(spec: MlpSpec, params: ParamVector) -> crate::Result<Self> {
        params.check_against(&spec)?;
        Ok(Self { spec, params })
    }

    pub fn forward(&self, x: &[f64]) -> crate::Result<Vec<f64>> {
        forward(&self.spec, &self.params, x)
    }
}
