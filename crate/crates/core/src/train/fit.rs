use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::gru::{forward, GruDims, GruParams};
use crate::ingest::WindowedDataset;

use super::backward::{backward_into, Gradients};
use super::evaluate::{evaluate, Evaluation};
use super::normalize::Normalizer;
use super::optim::{Optimizer, OptimizerKind};
use super::TrainError;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub gradient_clip_norm: Option<f64>,
    pub seed: u64,
    /// Batch loss (normalized units) above which training is aborted.
    pub divergence_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            steps_per_epoch: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            gradient_clip_norm: Some(5.0),
            seed: 0,
            divergence_threshold: 1e6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.epochs == 0 || self.steps_per_epoch == 0 || self.batch_size == 0 {
            return bad("epochs, steps_per_epoch and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if let Some(c) = self.gradient_clip_norm {
            if !(c > 0.0) {
                return bad("gradient_clip_norm must be positive");
            }
        }
        if !(self.divergence_threshold > 0.0) {
            return bad("divergence_threshold must be positive");
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.epochs * self.steps_per_epoch
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLoss {
    pub step: usize,
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub history: Vec<StepLoss>,
    pub test: Evaluation,
    pub duration: Duration,
}

impl TrainReport {
    /// `step,epoch,loss`
    pub fn write_history_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,epoch,loss")?;
        for h in &self.history {
            writeln!(out, "{},{},{}", h.step, h.epoch, h.loss)?;
        }
        Ok(())
    }

    pub fn epoch_losses(&self, epoch: usize) -> Vec<f64> {
        self.history.iter().filter(|h| h.epoch == epoch).map(|h| h.loss).collect()
    }
}

/// Samples per gradient chunk. Chunks are reduced in index order so the
/// result does not depend on how rayon schedules them.
const CHUNK: usize = 4;

/// Summed loss and summed gradient over the given sequence indices of
/// pre-normalized `rows`.
pub(crate) fn batch_gradients(
    p: &GruParams,
    rows: &[[f64; 4]],
    window_len: usize,
    indices: &[usize],
) -> Result<(f64, Gradients), TrainError> {
    let dims = p.dims();
    let partials: Vec<Result<(f64, Gradients), TrainError>> = indices
        .par_chunks(CHUNK)
        .map(|chunk| {
            let h0 = vec![0.0; dims.hidden];
            let mut g = Gradients::zeros(dims);
            let mut loss = 0.0;
            for &i in chunk {
                let trace = forward(p, &h0, &rows[i..i + window_len])?;
                loss += backward_into(p, &trace, &rows[i + window_len], &mut g)?;
            }
            Ok((loss, g))
        })
        .collect();

    let mut total_loss = 0.0;
    let mut total = Gradients::zeros(dims);
    for part in partials {
        let (l, g) = part?;
        total_loss += l;
        total.add(&g);
    }
    Ok((total_loss, total))
}

/// Trains a fresh model on the training split. The normalizer is fitted on
/// training rows only; the batch sampler and the initial weights are both
/// derived from `cfg.seed`.
pub fn fit(
    dataset: &WindowedDataset,
    cfg: &TrainConfig,
    dims: GruDims,
) -> Result<(GruParams, Normalizer, TrainReport), TrainError> {
    cfg.validate()?;
    if dims.input != 4 || dims.output != 4 || dims.hidden == 0 {
        return Err(TrainError::InvalidConfig(format!(
            "model must map 4 sectors to 4 sectors with a positive hidden size, got {:?}",
            dims
        )));
    }
    if dataset.train_range().is_empty() || dataset.test_range().is_empty() {
        return Err(TrainError::EmptySplit);
    }
    let started = Instant::now();

    let norm = Normalizer::fit_min_max(dataset.train_rows());
    let rows: Vec<[f64; 4]> = dataset.rows().iter().map(|r| norm.normalize(r)).collect();

    let mut params = GruParams::init(dims, cfg.seed);
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate, &params);
    let mut sampler = ChaCha8Rng::seed_from_u64(cfg.seed);
    sampler.set_stream(1);

    let n_train = dataset.train_range().len();
    let mut history = Vec::with_capacity(cfg.total_steps());
    let mut indices = vec![0usize; cfg.batch_size];
    for epoch in 0..cfg.epochs {
        for _ in 0..cfg.steps_per_epoch {
            let step = history.len();
            indices.iter_mut().for_each(|i| *i = sampler.random_range(0..n_train));

            let (loss_sum, mut grads) = batch_gradients(&params, &rows, dataset.window_len, &indices)?;
            let loss = loss_sum / cfg.batch_size as f64;
            if !loss.is_finite() || loss > cfg.divergence_threshold || !grads.is_finite() {
                return Err(TrainError::DivergedLoss { step, loss });
            }
            grads.scale(1.0 / cfg.batch_size as f64);
            if let Some(max) = cfg.gradient_clip_norm {
                grads.clip_global_norm(max);
            }
            optimizer.step(&mut params, &grads);
            if params.validate().is_err() {
                return Err(TrainError::DivergedLoss { step, loss: f64::NAN });
            }
            history.push(StepLoss { step, epoch, loss });
        }
    }

    let test = evaluate(&params, &norm, dataset)?;
    let report = TrainReport { history, test, duration: started.elapsed() };
    Ok((params, norm, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{make_windows, SectorSeries};

    fn noisy_series(n: usize, seed: u64) -> SectorSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SectorSeries::new(0, (0..n).map(|_| std::array::from_fn(|_| rng.random_range(0..50))).collect())
    }

    fn small_cfg(seed: u64) -> TrainConfig {
        TrainConfig { epochs: 2, steps_per_epoch: 5, batch_size: 8, seed, ..TrainConfig::default() }
    }

    #[test]
    fn history_length_and_determinism() {
        let ds = make_windows(&noisy_series(80, 1), 12, 0.8).unwrap();
        let cfg = small_cfg(3);
        let (p1, n1, r1) = fit(&ds, &cfg, GruDims::sectors(6)).unwrap();
        let (p2, n2, r2) = fit(&ds, &cfg, GruDims::sectors(6)).unwrap();
        assert_eq!(r1.history.len(), 10);
        assert_eq!(r1.history, r2.history);
        assert_eq!(p1, p2);
        assert_eq!(n1, n2);
        assert_eq!(r1.epoch_losses(1).len(), 5);
        let mut csv = Vec::new();
        r1.write_history_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("step,epoch,loss\n0,0,"));
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let ds = make_windows(&noisy_series(80, 2), 12, 0.8).unwrap();
        for optimizer in [OptimizerKind::Adam, OptimizerKind::Sgd] {
            let cfg = TrainConfig { learning_rate: 1e6, optimizer, ..small_cfg(0) };
            let err = fit(&ds, &cfg, GruDims::sectors(6)).unwrap_err();
            assert!(matches!(err, TrainError::DivergedLoss { .. }), "{:?}: {}", optimizer, err);
        }
    }

    #[test]
    fn invalid_inputs() {
        let ds = make_windows(&noisy_series(40, 2), 12, 0.8).unwrap();
        let cfg = TrainConfig { batch_size: 0, ..small_cfg(0) };
        assert!(matches!(fit(&ds, &cfg, GruDims::sectors(4)), Err(TrainError::InvalidConfig(_))));
        assert!(matches!(
            fit(&ds, &small_cfg(0), GruDims::new(3, 4, 4)),
            Err(TrainError::InvalidConfig(_))
        ));
    }

    #[test]
    fn parallel_reduction_matches_sequential_sum() {
        let ds = make_windows(&noisy_series(60, 4), 10, 0.8).unwrap();
        let norm = Normalizer::fit_min_max(ds.train_rows());
        let rows: Vec<[f64; 4]> = ds.rows().iter().map(|r| norm.normalize(r)).collect();
        let p = GruParams::init(GruDims::sectors(5), 1);
        let idx: Vec<usize> = (0..13).collect();
        let (loss, g) = batch_gradients(&p, &rows, 10, &idx).unwrap();
        let (loss2, g2) = batch_gradients(&p, &rows, 10, &idx).unwrap();
        assert_eq!(loss.to_bits(), loss2.to_bits());
        assert_eq!(g, g2);

        let mut seq = Gradients::zeros(p.dims());
        let mut seq_loss = 0.0;
        for &i in &idx {
            let tr = forward(&p, &[0.0; 5], &rows[i..i + 10]).unwrap();
            seq_loss += backward_into(&p, &tr, &rows[i + 10], &mut seq).unwrap();
        }
        assert!((seq_loss - loss).abs() < 1e-12);
        for (a, b) in seq.tensors().iter().zip(g.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
