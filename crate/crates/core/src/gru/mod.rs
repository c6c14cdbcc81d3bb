//! Single-layer gated recurrent unit with an affine readout.
//!
//! One step computes, with `σ` the logistic function:
//!
//! ```text
//! r  = σ(W_r h_prev + R_r x + b_r)          reset gate
//! h~ = h_prev ⊙ r                            gated state
//! z  = tanh(W_z h~ + R_z x + b_z)            candidate state
//! u  = σ(W_u h_prev + R_u x + b_u)          update gate
//! h  = (1 - u) ⊙ h_prev + u ⊙ z
//! ```
//!
//! `W_*` multiply the hidden state and `R_*` the input.

mod cell;
mod matrix;
mod model_file;
mod params;

pub use cell::{forward, gru_step, predict, readout, sigmoid, sigmoid_vec, ForwardTrace, StepTrace};
pub use matrix::Matrix;
pub use model_file::{deserialize_model, serialize_model, ModelFileError, FORMAT_VERSION, MAGIC};
pub use params::{GruDims, GruParams, TENSOR_NAMES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GruError {
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("input sequence is empty")]
    EmptySequence,
    #[error("parameters contain non-finite values")]
    NonFinite,
}
