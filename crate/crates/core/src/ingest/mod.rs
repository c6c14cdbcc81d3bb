//! CDR ingestion: raw record parsing, per-sector aggregation into 10-minute
//! count series, and sliding-window supervised datasets.

mod aggregate;
mod raw;
mod series;
mod window;

pub use aggregate::{aggregate, Aggregation, CountMode, SectorMap};
pub use raw::{
    parse_raw, parse_with, LineDiagnostic, LineIssue, ParsedRecords, RawCdrRecord, RecordSchema,
    TelecomItaliaSchema, ACTIVITY_FIELDS,
};
pub use series::{load_sector_series, write_sector_series, SectorSeries, SLOT_LEN_MS};
pub use window::{make_windows, WindowedDataset};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("input contains no records")]
    EmptyInput,
    #[error("no well-formed records to aggregate")]
    NoRecords,
    #[error("square id {0} is not part of the sector map")]
    UnknownSquare(u64),
    #[error("invalid sector map: {0}")]
    BadSectorMap(String),
    #[error("series has {slots} slots, need more than window length {window_len}")]
    SeriesTooShort { slots: usize, window_len: usize },
    #[error("window length must be positive")]
    ZeroWindow,
    #[error("train fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("split index {split_index} leaves an empty split out of {sequences} sequences")]
    InvalidSplit { sequences: usize, split_index: usize },
    #[error("sector series line {line}: {msg}")]
    SeriesFormat { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
