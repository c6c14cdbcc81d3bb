use std::io::{BufRead, Write};

use chrono::{DateTime, SecondsFormat, Utc};

use super::IngestError;

/// Length of one aggregation slot in milliseconds (10 minutes).
pub const SLOT_LEN_MS: i64 = 600_000;

/// Gap-free per-sector CDR counts, one row per 10-minute slot, columns
/// ordered A, B, C, D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSeries {
    /// Start of slot 0, UTC milliseconds since the epoch.
    pub t0: i64,
    pub counts: Vec<[u64; 4]>,
}

impl SectorSeries {
    pub fn new(t0: i64, counts: Vec<[u64; 4]>) -> Self {
        SectorSeries { t0, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn slot_start(&self, i: usize) -> i64 {
        self.t0 + i as i64 * SLOT_LEN_MS
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn rows_f64(&self) -> Vec<[f64; 4]> {
        self.counts.iter().map(|r| r.map(|c| c as f64)).collect()
    }
}

fn format_time(ms: i64) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ms.to_string())
}

fn parse_time(s: &str) -> Option<i64> {
    DateTime::parse_from_rfc3339(s).ok().map(|t| t.timestamp_millis())
}

/// `time,A,B,C,D` with one ISO-8601 UTC row per slot.
pub fn write_sector_series<W: Write>(series: &SectorSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "time,A,B,C,D")?;
    for (i, row) in series.counts.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_time(series.slot_start(i)),
            row[0],
            row[1],
            row[2],
            row[3]
        )?;
    }
    Ok(())
}

pub fn load_sector_series<R: BufRead>(input: R) -> Result<SectorSeries, IngestError> {
    let fmt_err = |line: usize, msg: String| IngestError::SeriesFormat { line, msg };
    let mut lines = input.lines().enumerate();

    match lines.next() {
        Some((_, header)) => {
            if header?.trim() != "time,A,B,C,D" {
                return Err(fmt_err(1, "expected header `time,A,B,C,D`".into()));
            }
        }
        None => return Err(IngestError::EmptyInput),
    }

    let mut t0 = None;
    let mut counts = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(fmt_err(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let ts = parse_time(fields[0])
            .ok_or_else(|| fmt_err(lineno, format!("bad timestamp {:?}", fields[0])))?;
        let start = *t0.get_or_insert(ts);
        let expected = start + counts.len() as i64 * SLOT_LEN_MS;
        if ts != expected {
            return Err(fmt_err(
                lineno,
                format!("slot {} is not contiguous (expected {})", fields[0], format_time(expected)),
            ));
        }
        let mut row = [0u64; 4];
        for (c, f) in row.iter_mut().zip(&fields[1..]) {
            *c = f.parse().map_err(|_| fmt_err(lineno, format!("bad count {:?}", f)))?;
        }
        counts.push(row);
    }

    match t0 {
        Some(t0) => Ok(SectorSeries { t0, counts }),
        None => Err(IngestError::EmptyInput),
    }
}
