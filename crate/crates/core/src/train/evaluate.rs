use std::io::Write;

use rayon::prelude::*;

use crate::gru::{predict, GruParams};
use crate::ingest::WindowedDataset;
use crate::sector::SECTORS;

use super::normalize::Normalizer;
use super::TrainError;

/// Denormalized test-split predictions next to ground truth and the
/// persistence forecast (last observed slot).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub seq_indices: Vec<usize>,
    pub predictions: Vec<[f64; 4]>,
    pub truths: Vec<[f64; 4]>,
    pub persistence: Vec<[f64; 4]>,
    pub mse_per_sector: [f64; 4],
    pub mse: f64,
    pub persistence_mse_per_sector: [f64; 4],
    pub persistence_mse: f64,
}

/// Per-sector and aggregate mean squared error.
pub fn score(predictions: &[[f64; 4]], truths: &[[f64; 4]]) -> ([f64; 4], f64) {
    assert_eq!(predictions.len(), truths.len(), "prediction/truth count");
    if predictions.is_empty() {
        return ([0.0; 4], 0.0);
    }
    let n = predictions.len() as f64;
    let mut per = [0.0; 4];
    for (p, t) in predictions.iter().zip(truths) {
        for s in 0..4 {
            per[s] += (p[s] - t[s]) * (p[s] - t[s]);
        }
    }
    per.iter_mut().for_each(|v| *v /= n);
    (per, per.iter().sum::<f64>() / 4.0)
}

pub fn evaluate(
    p: &GruParams,
    norm: &Normalizer,
    dataset: &WindowedDataset,
) -> Result<Evaluation, TrainError> {
    let range = dataset.test_range();
    if range.is_empty() {
        return Err(TrainError::EmptySplit);
    }
    if norm.len() != 4 || p.dims().input != 4 || p.dims().output != 4 {
        return Err(TrainError::ShapeMismatch { expected: 4, found: p.dims().input });
    }
    let seq_indices: Vec<usize> = range.collect();
    let predictions = seq_indices
        .par_iter()
        .map(|&i| {
            let xs: Vec<[f64; 4]> = dataset.input(i).iter().map(|r| norm.normalize(r)).collect();
            predict(p, &xs).map(|y| norm.denormalize(&y))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let truths: Vec<[f64; 4]> = seq_indices.iter().map(|&i| dataset.target(i)).collect();
    let persistence: Vec<[f64; 4]> =
        seq_indices.iter().map(|&i| dataset.input(i)[dataset.window_len - 1]).collect();

    let (mse_per_sector, mse) = score(&predictions, &truths);
    let (persistence_mse_per_sector, persistence_mse) = score(&persistence, &truths);
    Ok(Evaluation {
        seq_indices,
        predictions,
        truths,
        persistence,
        mse_per_sector,
        mse,
        persistence_mse_per_sector,
        persistence_mse,
    })
}

impl Evaluation {
    pub fn len(&self) -> usize {
        self.seq_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq_indices.is_empty()
    }

    /// `seq_index,sector,prediction,truth`, one line per sequence and sector.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "seq_index,sector,prediction,truth")?;
        for ((i, pred), truth) in self.seq_indices.iter().zip(&self.predictions).zip(&self.truths) {
            for s in SECTORS {
                writeln!(out, "{},{},{},{}", i, s, pred[s.index()], truth[s.index()])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gru::GruDims;
    use crate::ingest::{make_windows, SectorSeries};

    fn dataset() -> WindowedDataset {
        let counts = (0..30u64).map(|i| [i, 2 * i, i % 3, 5]).collect();
        make_windows(&SectorSeries::new(0, counts), 4, 0.5).unwrap()
    }

    #[test]
    fn perfect_predictions_score_zero() {
        let ds = dataset();
        let truths: Vec<[f64; 4]> = ds.test_range().map(|i| ds.target(i)).collect();
        assert_eq!(score(&truths, &truths), ([0.0; 4], 0.0));
    }

    #[test]
    fn table_shape_and_persistence() {
        let ds = dataset();
        let p = GruParams::init(GruDims::sectors(3), 0);
        let norm = Normalizer::fit_min_max(ds.train_rows());
        let ev = evaluate(&p, &norm, &ds).unwrap();
        assert_eq!(ev.len(), ds.test_range().len());
        assert_eq!(ev.seq_indices[0], ds.split_index);
        // ramp sector A moves by exactly 1 per slot
        assert_eq!(ev.persistence_mse_per_sector[0], 1.0);
        assert_eq!(ev.persistence_mse_per_sector[3], 0.0);

        let mut csv = Vec::new();
        ev.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * ev.len());
        assert!(text.lines().nth(1).unwrap().starts_with(&format!("{},A,", ds.split_index)));
    }
}
