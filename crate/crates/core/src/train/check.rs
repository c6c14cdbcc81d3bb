use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gru::{GruDims, GruParams};

use super::backward::{grad_check_report, TensorCheck};
use super::TrainError;

/// A seeded model with a random input sequence and target.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckCase {
    pub seed: u64,
    pub params: GruParams,
    pub inputs: Vec<[f64; 4]>,
    pub target: [f64; 4],
}

impl CheckCase {
    /// Weights from [`GruParams::init`], biases uniform in `±0.5` so every
    /// tensor carries signal, inputs and target uniform in `[0, 1]` as after
    /// normalization, sequence length uniform in `1..=max_len`.
    pub fn random(hidden: usize, max_len: usize, seed: u64) -> Self {
        let mut params = GruParams::init(GruDims::sectors(hidden), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        for b in [&mut params.bias_reset, &mut params.bias_cand, &mut params.bias_update, &mut params.out_bias] {
            b.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
        }
        let len = rng.random_range(1..=max_len.max(1));
        let inputs = (0..len).map(|_| std::array::from_fn(|_| rng.random::<f64>())).collect();
        let target = std::array::from_fn(|_| rng.random::<f64>());
        CheckCase { seed, params, inputs, target }
    }

    pub fn check(&self, epsilon: f64) -> Result<Vec<TensorCheck>, TrainError> {
        grad_check_report(&self.params, &self.inputs, &self.target, epsilon)
    }
}

/// `count` cases cycling through `hiddens`, seeded `seed, seed + 1, …`.
pub fn check_cases(count: usize, hiddens: &[usize], max_len: usize, seed: u64) -> Vec<CheckCase> {
    (0..count)
        .map(|i| CheckCase::random(hiddens[i % hiddens.len()], max_len, seed.wrapping_add(i as u64)))
        .collect()
}
