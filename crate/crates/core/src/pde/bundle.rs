use crate::network::{JetOutput, JetPlan};

/// Value, gradient and pure second derivatives of the network at one point.
///
/// `first[k·input_dim + j] = ∂u_k/∂x_j`, `second[k·input_dim + j] = ∂²u_k/∂x_j²`.
/// Entries a residual does not consume may be left at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivBundle<S> {
    pub u: Vec<S>,
    pub first: Vec<S>,
    pub second: Vec<S>,
}

impl<S: Copy> DerivBundle<S> {
    /// Every slot set to `fill`.
    pub fn filled(output_dim: usize, input_dim: usize, fill: S) -> Self {
        Self { u: vec![fill; output_dim], first: vec![fill; output_dim * input_dim], second: vec![fill; output_dim * input_dim] }
    }

    pub fn output_dim(&self) -> usize {
        self.u.len()
    }

    pub fn input_dim(&self) -> usize {
        if self.u.is_empty() {
            0
        } else {
            self.first.len() / self.u.len()
        }
    }

    #[inline]
    pub fn u(&self, k: usize) -> S {
        self.u[k]
    }

    #[inline]
    pub fn d1(&self, k: usize, j: usize) -> S {
        self.first[k * self.input_dim() + j]
    }

    #[inline]
    pub fn d2(&self, k: usize, j: usize) -> S {
        self.second[k * self.input_dim() + j]
    }
}

impl DerivBundle<f64> {
    pub fn zeros(output_dim: usize, input_dim: usize) -> Self {
        Self::filled(output_dim, input_dim, 0.0)
    }

    /// Gathers point `p` of a batched jet evaluation.
    pub fn from_jets(out: &JetOutput, plan: &JetPlan, input_dim: usize, p: usize) -> Self {
        let mut b = Self::zeros(out.out_dim, input_dim);
        for k in 0..out.out_dim {
            b.u[k] = out.get(k, 0, p);
            for &(c, _) in plan.dirs() {
                if let Some(blk) = plan.first_block(c) {
                    b.first[k * input_dim + c] = out.get(k, blk, p);
                }
                if let Some(blk) = plan.second_block(c) {
                    b.second[k * input_dim + c] = out.get(k, blk, p);
                }
            }
        }
        b
    }
}
