use super::spec::{Activation, MlpSpec, ParamVector};
use crate::autodiff::{lift_seeded, Dual2, Scalar};
use crate::error::{arg, Result};

/// Forward pass over any [`Scalar`]; `params` follows the flat layout of `spec`.
pub fn forward_generic<S: Scalar>(spec: &MlpSpec, params: &[S], x: &[S]) -> Vec<S> {
    let layers = spec.layers();
    let last = layers.len() - 1;
    let mut act: Vec<S> = x.to_vec();
    for (li, layer) in layers.iter().enumerate() {
        let w = &params[layer.weight_range()];
        let b = &params[layer.bias_range()];
        let mut next: Vec<S> = (0..layer.fan_out)
            .map(|o| S::affine(b[o], &w[o * layer.fan_in..(o + 1) * layer.fan_in], &act))
            .collect();
        if li < last {
            next.iter_mut().for_each(|v| *v = v.tanh());
        } else if spec.output_activation == Activation::Sigmoid {
            next.iter_mut().for_each(|v| *v = v.sigmoid());
        }
        act = next;
    }
    act
}

fn check(spec: &MlpSpec, params: &ParamVector, x: &[f64]) -> Result<()> {
    if x.len() != spec.input_dim {
        return arg(format!("input has dimension {}, network expects {}", x.len(), spec.input_dim));
    }
    params.check_against(spec)
}

pub fn forward(spec: &MlpSpec, params: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    check(spec, params, x)?;
    Ok(forward_generic(spec, &params.values, x))
}

/// `(u, ∂u/∂x_j, ∂²u/∂x_j²)` for every output component.
pub fn forward_dual(spec: &MlpSpec, params: &ParamVector, x: &[f64], j: usize) -> Result<Vec<Dual2>> {
    check(spec, params, x)?;
    let xs = lift_seeded(x, j)?;
    let ps: Vec<Dual2> = params.values.iter().map(|&w| Dual2::constant(w)).collect();
    Ok(forward_generic(spec, &ps, &xs))
}
