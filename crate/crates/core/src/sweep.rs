//! Sector ranking and SSB slot assignment for one synchronization burst.
//!
//! A burst lasts 250 µs and holds 14 SSBs. Sectors are ranked by predicted
//! activity and laid out round-robin in rank order, so the busiest sector
//! gets slot 0 and four of the fourteen slots.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::sector::{Sector, SECTORS};

pub const N_SSB: usize = 14;
pub const BURST_DURATION_US: f64 = 250.0;
pub const SSB_DURATION_US: f64 = BURST_DURATION_US / N_SSB as f64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("prediction contains a non-finite value: {0:?}")]
    NonFiniteInput([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingSource {
    Predicted,
    Sequential,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorRanking {
    pub order: [Sector; 4],
    /// Sectors with equal score, in rank order; members listed A..D.
    pub tie_groups: Vec<Vec<Sector>>,
    pub source: RankingSource,
}

/// Float-safe equality used for tie detection.
pub fn values_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * 1f64.max(a.abs()).max(b.abs())
}

/// Descending order of `scores`; tied sectors are shuffled uniformly with
/// `rng`, which is only consumed when ties exist.
pub fn rank_sectors_from<R: Rng + ?Sized>(
    scores: &[f64; 4],
    source: RankingSource,
    rng: &mut R,
) -> Result<SectorRanking, SweepError> {
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(SweepError::NonFiniteInput(*scores));
    }
    let mut sorted = SECTORS;
    sorted.sort_by(|a, b| scores[b.index()].total_cmp(&scores[a.index()]));

    let mut tie_groups: Vec<Vec<Sector>> = Vec::with_capacity(4);
    let mut order = Vec::with_capacity(4);
    let mut start = 0;
    while start < 4 {
        let mut end = start + 1;
        while end < 4 && values_tied(scores[sorted[end - 1].index()], scores[sorted[end].index()]) {
            end += 1;
        }
        let mut group = sorted[start..end].to_vec();
        group.sort();
        let mut shuffled = group.clone();
        if shuffled.len() > 1 {
            shuffled.shuffle(rng);
        }
        order.extend(shuffled);
        tie_groups.push(group);
        start = end;
    }
    let order = [order[0], order[1], order[2], order[3]];
    Ok(SectorRanking { order, tie_groups, source })
}

pub fn rank_sectors<R: Rng + ?Sized>(
    pred: &[f64; 4],
    rng: &mut R,
) -> Result<SectorRanking, SweepError> {
    rank_sectors_from(pred, RankingSource::Predicted, rng)
}

/// Fixed A, B, C, D order.
pub fn sequential_ranking() -> SectorRanking {
    SectorRanking {
        order: SECTORS,
        tie_groups: SECTORS.iter().map(|s| vec![*s]).collect(),
        source: RankingSource::Sequential,
    }
}

/// SSB index → sector for one burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSchedule {
    pub slots: [Sector; N_SSB],
}

pub fn build_schedule(ranking: &SectorRanking) -> SweepSchedule {
    SweepSchedule { slots: std::array::from_fn(|i| ranking.order[i % 4]) }
}

impl SweepSchedule {
    pub fn from_order(order: [Sector; 4]) -> Self {
        SweepSchedule { slots: std::array::from_fn(|i| order[i % 4]) }
    }

    pub fn burst_duration_us(&self) -> f64 {
        BURST_DURATION_US
    }

    pub fn slot_duration_us(&self) -> f64 {
        SSB_DURATION_US
    }

    pub fn slot_start_us(ssb_index: usize) -> f64 {
        ssb_index as f64 * BURST_DURATION_US / N_SSB as f64
    }

    pub fn first_slot(&self, sector: Sector) -> Option<usize> {
        self.slots.iter().position(|&s| s == sector)
    }

    /// SSB indices aimed at `sector`, ascending.
    pub fn slots_of(&self, sector: Sector) -> Vec<usize> {
        (0..N_SSB).filter(|&i| self.slots[i] == sector).collect()
    }

    pub fn slot_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        self.slots.iter().for_each(|s| c[s.index()] += 1);
        c
    }

    /// `ssb_index,sector,start_offset_us`
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "ssb_index,sector,start_offset_us")?;
        for (i, s) in self.slots.iter().enumerate() {
            writeln!(out, "{},{},{:.6}", i, s, SweepSchedule::slot_start_us(i))?;
        }
        Ok(())
    }
}
