//! Backpropagation through time under mean squared error, gradient
//! verification, the training loop and held-out evaluation.

mod backward;
mod check;
mod evaluate;
mod fit;
mod normalize;
mod optim;

pub use backward::{backward, backward_into, grad_check, grad_check_report, mse, Gradients, TensorCheck};
pub use check::{check_cases, CheckCase};
pub use evaluate::{evaluate, score, Evaluation};
pub use fit::{fit, StepLoss, TrainConfig, TrainReport};
pub use normalize::Normalizer;
pub use optim::OptimizerKind;

use crate::gru::GruError;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("trace does not match the model: {0}")]
    TraceMismatch(String),
    #[error("training or test split is empty")]
    EmptySplit,
    #[error("loss diverged at step {step} (loss = {loss})")]
    DivergedLoss { step: usize, loss: f64 },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid normalizer: {0}")]
    BadNormalizer(String),
    #[error(transparent)]
    Gru(#[from] GruError),
}
