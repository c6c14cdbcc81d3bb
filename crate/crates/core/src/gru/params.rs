use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;
use super::GruError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GruDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl GruDims {
    pub fn new(input: usize, hidden: usize, output: usize) -> Self {
        GruDims { input, hidden, output }
    }

    /// Four sector counts in, four sector forecasts out.
    pub fn sectors(hidden: usize) -> Self {
        GruDims::new(4, hidden, 4)
    }
}

/// Weights of one GRU layer plus its affine readout.
///
/// `recur_*` matrices (hidden × hidden) act on the previous hidden state,
/// `input_*` matrices (hidden × input) act on the current input. The gate
/// suffixes are `reset`, `cand` (candidate state) and `update`.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub recur_reset: Matrix,
    pub input_reset: Matrix,
    pub bias_reset: Vec<f64>,
    pub recur_cand: Matrix,
    pub input_cand: Matrix,
    pub bias_cand: Vec<f64>,
    pub recur_update: Matrix,
    pub input_update: Matrix,
    pub bias_update: Vec<f64>,
    pub out_weight: Matrix,
    pub out_bias: Vec<f64>,
}

/// Names used for each tensor in model files and gradient reports, in
/// [`GruParams::tensors`] order.
pub const TENSOR_NAMES: [&str; 11] =
    ["W_r", "R_r", "b_r", "W_z", "R_z", "b_z", "W_u", "R_u", "b_u", "W_out", "b_out"];

impl GruParams {
    pub fn zeros(dims: GruDims) -> Self {
        let GruDims { input, hidden, output } = dims;
        GruParams {
            recur_reset: Matrix::zeros(hidden, hidden),
            input_reset: Matrix::zeros(hidden, input),
            bias_reset: vec![0.0; hidden],
            recur_cand: Matrix::zeros(hidden, hidden),
            input_cand: Matrix::zeros(hidden, input),
            bias_cand: vec![0.0; hidden],
            recur_update: Matrix::zeros(hidden, hidden),
            input_update: Matrix::zeros(hidden, input),
            bias_update: vec![0.0; hidden],
            out_weight: Matrix::zeros(output, hidden),
            out_bias: vec![0.0; output],
        }
    }

    /// Weights uniform in `±1/sqrt(hidden)`, biases zero.
    pub fn init(dims: GruDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (dims.hidden as f64).sqrt();
        let mut p = GruParams::zeros(dims);
        for m in [
            &mut p.recur_reset,
            &mut p.input_reset,
            &mut p.recur_cand,
            &mut p.input_cand,
            &mut p.recur_update,
            &mut p.input_update,
            &mut p.out_weight,
        ] {
            for w in m.as_mut_slice() {
                *w = rng.random_range(-bound..=bound);
            }
        }
        p
    }

    pub fn dims(&self) -> GruDims {
        GruDims {
            input: self.input_reset.cols(),
            hidden: self.recur_reset.rows(),
            output: self.out_weight.rows(),
        }
    }

    /// Shape of every tensor as `(rows, cols)`, vectors as `(1, len)`.
    pub fn shapes(dims: GruDims) -> [(usize, usize); 11] {
        let GruDims { input: i, hidden: h, output: o } = dims;
        [(h, h), (h, i), (1, h), (h, h), (h, i), (1, h), (h, h), (h, i), (1, h), (o, h), (1, o)]
    }

    pub fn tensors(&self) -> [&[f64]; 11] {
        [
            self.recur_reset.as_slice(),
            self.input_reset.as_slice(),
            &self.bias_reset,
            self.recur_cand.as_slice(),
            self.input_cand.as_slice(),
            &self.bias_cand,
            self.recur_update.as_slice(),
            self.input_update.as_slice(),
            &self.bias_update,
            self.out_weight.as_slice(),
            &self.out_bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 11] {
        [
            self.recur_reset.as_mut_slice(),
            self.input_reset.as_mut_slice(),
            &mut self.bias_reset,
            self.recur_cand.as_mut_slice(),
            self.input_cand.as_mut_slice(),
            &mut self.bias_cand,
            self.recur_update.as_mut_slice(),
            self.input_update.as_mut_slice(),
            &mut self.bias_update,
            self.out_weight.as_mut_slice(),
            &mut self.out_bias,
        ]
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Checks that every tensor agrees with the dimensions implied by the
    /// reset-gate matrices and the readout.
    pub fn validate(&self) -> Result<(), GruError> {
        let dims = self.dims();
        let actual = [
            self.recur_reset.shape(),
            self.input_reset.shape(),
            (1, self.bias_reset.len()),
            self.recur_cand.shape(),
            self.input_cand.shape(),
            (1, self.bias_cand.len()),
            self.recur_update.shape(),
            self.input_update.shape(),
            (1, self.bias_update.len()),
            self.out_weight.shape(),
            (1, self.out_bias.len()),
        ];
        for ((name, want), got) in TENSOR_NAMES.iter().zip(GruParams::shapes(dims)).zip(actual) {
            if want != got {
                return Err(GruError::DimensionMismatch {
                    what: name,
                    expected: want.0 * want.1,
                    found: got.0 * got.1,
                });
            }
        }
        if self.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(GruError::NonFinite);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_bounded() {
        let dims = GruDims::sectors(16);
        let a = GruParams::init(dims, 7);
        assert_eq!(a, GruParams::init(dims, 7));
        assert_ne!(a, GruParams::init(dims, 8));
        assert!(a.bias_reset.iter().chain(&a.out_bias).all(|&b| b == 0.0));
        assert!(a.recur_cand.as_slice().iter().all(|w| w.abs() <= 0.25));
        assert_eq!(a.dims(), dims);
        assert_eq!(a.num_scalars(), 3 * (256 + 64 + 16) + 64 + 4);
        a.validate().unwrap();
    }

    #[test]
    fn validate_catches_shape_errors() {
        let mut p = GruParams::zeros(GruDims::sectors(3));
        p.bias_cand.push(0.0);
        assert!(matches!(p.validate(), Err(GruError::DimensionMismatch { what: "b_z", .. })));
    }
}
