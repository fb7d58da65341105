//! Pointer network and its training loop.

pub mod attention;
pub mod checkpoint;
pub mod lstm;
pub mod network;
pub mod tensor;
pub mod train;

pub use checkpoint::{load_checkpoint, parse_checkpoint, save_checkpoint};
pub use lstm::LstmWeights;
pub use network::{decode, loss_and_gradients, predict, DecodeMode, PointerNetParams, GROUP_NAMES};
pub use tensor::Tensor;
pub use train::{evaluate_loss, token_accuracy, AdamState, TrainConfig, Trainer};
