//! Minimal dense-network engine: tensors, ReLU dense layers, the three
//! ordinal heads, reverse-mode gradients, Adam, and early stopping.

mod adam;
mod gradcheck;
mod layer;
mod network;
mod tensor;
mod train;

pub use adam::AdamState;
pub use gradcheck::{finite_difference_gradient, max_relative_error};
pub use layer::{Activation, DenseLayer, LayerGrads};
pub use network::{ArchSpec, ForwardPass, HeadKind, Network};
pub use tensor::Tensor;
pub use train::{batch_loss, train, EpochRecord, LossKind, TrainConfig, TrainReport};
