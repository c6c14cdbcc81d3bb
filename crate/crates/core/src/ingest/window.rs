use super::series::SectorSeries;
use super::IngestError;

/// Sliding windows (stride 1, horizon 1) over a sector series, split
/// chronologically into a training prefix and a test suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub window_len: usize,
    pub horizon: usize,
    rows: Vec<[f64; 4]>,
    pub split_index: usize,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.rows.len() - self.window_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rows `[i, i + window_len)`.
    pub fn input(&self, i: usize) -> &[[f64; 4]] {
        &self.rows[i..i + self.window_len]
    }

    /// Row `i + window_len`.
    pub fn target(&self, i: usize) -> [f64; 4] {
        self.rows[i + self.window_len]
    }

    pub fn train_range(&self) -> std::ops::Range<usize> {
        0..self.split_index
    }

    pub fn test_range(&self) -> std::ops::Range<usize> {
        self.split_index..self.len()
    }

    /// Every series row touched by a training sequence (inputs or target).
    pub fn train_rows(&self) -> &[[f64; 4]] {
        &self.rows[..self.split_index + self.window_len]
    }

    pub fn rows(&self) -> &[[f64; 4]] {
        &self.rows
    }
}

pub fn make_windows(
    series: &SectorSeries,
    window_len: usize,
    train_fraction: f64,
) -> Result<WindowedDataset, IngestError> {
    if window_len == 0 {
        return Err(IngestError::ZeroWindow);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(IngestError::InvalidFraction(train_fraction));
    }
    let slots = series.len();
    if slots <= window_len {
        return Err(IngestError::SeriesTooShort { slots, window_len });
    }
    let sequences = slots - window_len;
    let split_index = (train_fraction * sequences as f64).floor() as usize;
    if split_index == 0 || split_index >= sequences {
        return Err(IngestError::InvalidSplit { sequences, split_index });
    }
    Ok(WindowedDataset { window_len, horizon: 1, rows: series.rows_f64(), split_index })
}
