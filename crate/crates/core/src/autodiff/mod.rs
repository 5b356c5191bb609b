//! Forward second-order jets along one input direction, and a reverse tape
//! whose node payloads are those jets.
//!
//! The PDE residuals need `u`, `∂u/∂x_j` and `∂²u/∂x_j²`; the training loss
//! then needs the gradient of a function of all three with respect to the
//! network parameters. [`Dual2`] carries the jet, [`GradTape`] differentiates
//! through it.

mod dual;
mod scalar;
mod tape;

pub use dual::{dual_tanh, lift_seeded, Dual2};
pub use scalar::Scalar;
pub use tape::{GradTape, Var};
