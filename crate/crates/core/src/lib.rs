//! Training engine for physics-informed neural networks.
//!
//! The crate covers the whole pipeline: jet-based automatic differentiation
//! ([`autodiff`]), tanh networks and a batched jet engine ([`network`]), the
//! benchmark PDE problems ([`pde`]), collocation sampling ([`sampling`]),
//! residual losses and adaptive point weighting ([`losses`]), Adam
//! ([`optim`]), the PINN / PINN+PW / GA-PINN / GA-PINN+PW / DGM trainers
//! ([`train`]) and test-set evaluation ([`metrics`]).

pub mod autodiff;
mod error;
pub mod network;
pub mod optim;
pub mod losses;
pub mod metrics;
pub mod pde;
pub mod rng;
pub mod sampling;
pub mod train;

pub use error::{Error, Result};
