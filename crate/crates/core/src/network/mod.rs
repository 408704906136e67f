//! The complex spectral network, its loss and gradients, and training.

pub mod adam;
pub mod config;
pub mod model;
pub mod train;

pub use adam::Adam;
pub use config::{ChargeMode, ModelConfig};
pub use model::{
    backward, backward_from_logits, complex_relu, forward, loss, predict, relu_keeps, softmax,
    ForwardCache, Gradients, LayerParams, ModelState,
};
pub use train::{accuracy, evaluate, train, EpochRecord, History, SplitMask};
