use std::collections::HashMap;

use super::raw::RawCdrRecord;
use super::series::{SectorSeries, SLOT_LEN_MS};
use super::IngestError;
use crate::sector::{Sector, SECTORS};

/// Bijection between four Milano-grid squares and the sectors A..D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorMap {
    squares: [u64; 4],
}

impl SectorMap {
    pub fn new(pairs: &[(u64, Sector)]) -> Result<Self, IngestError> {
        if pairs.len() != 4 {
            return Err(IngestError::BadSectorMap(format!(
                "expected 4 squares, got {}",
                pairs.len()
            )));
        }
        let mut squares = [0u64; 4];
        let mut filled = [false; 4];
        for &(square, sector) in pairs {
            if square == 0 {
                return Err(IngestError::BadSectorMap("square id must be positive".into()));
            }
            if filled[sector.index()] {
                return Err(IngestError::BadSectorMap(format!("sector {} assigned twice", sector)));
            }
            if squares.contains(&square) {
                return Err(IngestError::BadSectorMap(format!("square {} assigned twice", square)));
            }
            squares[sector.index()] = square;
            filled[sector.index()] = true;
        }
        Ok(SectorMap { squares })
    }

    /// Parse `square=sector` pairs separated by commas, whitespace or
    /// newlines, e.g. `5060=A,5061=B,5160=C,5161=D`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut pairs = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for item in line.split(|c: char| c == ',' || c.is_whitespace()) {
                if item.is_empty() {
                    continue;
                }
                let (sq, sec) = item.split_once(['=', ':']).ok_or_else(|| {
                    IngestError::BadSectorMap(format!("expected square=sector, got {:?}", item))
                })?;
                let sq: u64 = sq
                    .trim()
                    .parse()
                    .map_err(|_| IngestError::BadSectorMap(format!("bad square id {:?}", sq)))?;
                let sec: Sector =
                    sec.parse().map_err(|e| IngestError::BadSectorMap(format!("{}", e)))?;
                pairs.push((sq, sec));
            }
        }
        SectorMap::new(&pairs)
    }

    pub fn sector_of(&self, square_id: u64) -> Option<Sector> {
        self.squares
            .iter()
            .position(|&s| s == square_id)
            .and_then(Sector::from_index)
    }

    pub fn square_of(&self, sector: Sector) -> u64 {
        self.squares[sector.index()]
    }
}

impl std::fmt::Display for SectorMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = SECTORS
            .iter()
            .map(|s| format!("{}={}", self.square_of(*s), s))
            .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// Number of records per sector and slot.
    #[default]
    RecordCount,
    /// Rounded sum of all activity fields per sector and slot.
    ActivitySum,
}

impl std::fmt::Display for CountMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CountMode::RecordCount => "record_count",
            CountMode::ActivitySum => "activity_sum",
        })
    }
}

impl std::str::FromStr for CountMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "record_count" | "records" => Ok(CountMode::RecordCount),
            "activity_sum" | "activity" => Ok(CountMode::ActivitySum),
            other => Err(format!("unknown count mode {:?}", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub series: SectorSeries,
    /// Slots between the first and last record with no records at all;
    /// their rows are explicit zeros.
    pub missing_slots: Vec<usize>,
}

pub fn aggregate(
    records: &[RawCdrRecord],
    map: &SectorMap,
    mode: CountMode,
) -> Result<Aggregation, IngestError> {
    let mut keyed = Vec::with_capacity(records.len());
    for rec in records {
        let sector = map
            .sector_of(rec.square_id)
            .ok_or(IngestError::UnknownSquare(rec.square_id))?;
        keyed.push((rec.slot_start, sector, rec));
    }

    let t0 = keyed.iter().map(|k| k.0).min().ok_or(IngestError::NoRecords)?;
    let t_last = keyed.iter().map(|k| k.0).max().unwrap_or(t0);
    let t0 = t0.div_euclid(SLOT_LEN_MS) * SLOT_LEN_MS;
    let n_slots = ((t_last - t0).div_euclid(SLOT_LEN_MS) + 1) as usize;

    let mut counts = vec![[0u64; 4]; n_slots];
    let mut occupied = vec![false; n_slots];
    let mut sums: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
    for (start, sector, rec) in keyed {
        let slot = (start - t0).div_euclid(SLOT_LEN_MS) as usize;
        occupied[slot] = true;
        match mode {
            CountMode::RecordCount => counts[slot][sector.index()] += 1,
            CountMode::ActivitySum => {
                sums.entry((slot, sector.index())).or_default().push(rec.activity_sum())
            }
        }
    }
    for ((slot, s), mut values) in sums {
        // fixed summation order keeps the result independent of input order
        values.sort_by(f64::total_cmp);
        counts[slot][s] = values.iter().sum::<f64>().round() as u64;
    }

    let missing_slots = occupied
        .iter()
        .enumerate()
        .filter(|(_, o)| !**o)
        .map(|(i, _)| i)
        .collect();
    Ok(Aggregation { series: SectorSeries::new(t0, counts), missing_slots })
}
