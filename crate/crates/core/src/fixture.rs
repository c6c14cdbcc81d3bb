//! Bundled and synthetic datasets.
//!
//! The raw CDR sample covers one cell (four squares) over five slots from
//! 2013-11-17 22:10 UTC. The synthetic generator produces a Milan-like
//! series: a daily sinusoid per sector plus Poisson noise.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::ingest::{SectorSeries, SLOT_LEN_MS};

/// Tab-separated raw CDR rows, several country codes per square and slot.
pub const SAMPLE_RAW_TSV: &str = include_str!("../fixtures/table1_raw.tsv");
/// Square to sector assignment for [`SAMPLE_RAW_TSV`].
pub const SAMPLE_SECTOR_MAP: &str = include_str!("../fixtures/table1_map.txt");
/// Expected per-sector counts of the sample, one row per slot.
pub const SAMPLE_COUNTS: [[u64; 4]; 5] =
    [[3, 3, 3, 5], [2, 2, 2, 2], [3, 2, 1, 2], [2, 3, 3, 4], [3, 1, 2, 5]];
/// 2013-11-17 22:10:00 UTC.
pub const SAMPLE_T0_MS: i64 = 1_384_726_200_000;

pub const SLOTS_PER_DAY: usize = 144;

/// Parameters of the synthetic series.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub slots: usize,
    /// Mean count per slot for each sector.
    pub base: [f64; 4],
    /// Daily swing as a fraction of the base, in `[0, 1]`.
    pub amplitude: f64,
    /// Phase of each sector's daily peak, in days.
    pub phase: [f64; 4],
    pub t0_ms: i64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Two weeks of 10-minute slots with sectors peaking at different times
    /// of day.
    pub fn milan_like(seed: u64) -> Self {
        SyntheticSpec {
            slots: 14 * SLOTS_PER_DAY,
            base: [30.0, 24.0, 20.0, 36.0],
            amplitude: 0.8,
            phase: [0.0, 0.2, 0.45, 0.7],
            // 2013-11-01 00:00 UTC
            t0_ms: 1_383_264_000_000,
            seed,
        }
    }

    /// Same shape with sector D carrying 70% of the traffic and the others
    /// 10% each.
    pub fn d_heavy(seed: u64) -> Self {
        SyntheticSpec { base: [6.0, 6.0, 6.0, 42.0], ..Self::milan_like(seed) }
    }

    /// Noise-free mean count of `sector` in `slot`.
    pub fn mean_at(&self, slot: usize, sector: usize) -> f64 {
        let day = slot as f64 / SLOTS_PER_DAY as f64;
        self.base[sector] * (1.0 + self.amplitude * (TAU * (day - self.phase[sector])).cos())
    }

    /// Long-run share of each sector.
    pub fn shares(&self) -> [f64; 4] {
        let total: f64 = self.base.iter().sum();
        self.base.map(|b| b / total)
    }
}

pub fn synthetic_series(spec: &SyntheticSpec) -> SectorSeries {
    assert!((0.0..=1.0).contains(&spec.amplitude), "amplitude must be in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let counts = (0..spec.slots)
        .map(|t| {
            std::array::from_fn(|s| {
                let mean = spec.mean_at(t, s);
                if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
                } else {
                    0
                }
            })
        })
        .collect();
    debug_assert_eq!(spec.t0_ms.rem_euclid(SLOT_LEN_MS), 0);
    SectorSeries::new(spec.t0_ms, counts)
}
