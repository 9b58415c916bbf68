//! Minimal dense-network engine with exact analytic gradients.
//!
//! Supports the small fixed topologies used by the speed-limit controllers
//! (two-layer perceptrons with relu/sigmoid/identity activations), target
//! network soft updates, an Adam optimizer, and a versioned binary weight
//! file format.

mod activation;
mod adam;
mod error;
mod io;
mod mlp;

pub use activation::Activation;
pub use adam::{Adam, AdamConfig, StepOutcome};
pub use error::NeuralError;
pub use mlp::{soft_update, ForwardTrace, Gradients, Layer, LayerGrad, Mlp};

pub type Result<T> = std::result::Result<T, NeuralError>;
