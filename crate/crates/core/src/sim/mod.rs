//! Discrete-event model of cell search: UEs arrive per sector as Poisson
//! processes and are discovered at the first SSB aimed at their sector.

mod closed_form;
mod engine;
mod policy;
mod report;
mod scenario;

pub use closed_form::expected_delay_static;
pub use engine::{simulate, simulate_many};
pub use policy::SweepPolicy;
pub use report::{
    compare, summarize, write_paired_csv, write_reports_csv, write_summary_csv, Comparison,
    ComparisonRow, DelayStats, PolicySummary, SimReport, UeOutcome,
};
pub use scenario::{named_policy, replay_config, CDR_SLOT_US};

use crate::sector::Sector;
use crate::sweep::{BURST_DURATION_US, N_SSB};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("sector shares must be non-negative and sum to 1, got {0:?}")]
    BadShares([f64; 4]),
    #[error("sector {0} has arrivals but no SSB in the schedule")]
    UnservedSector(Sector),
    #[error("reports were not produced from matching configs and seeds: {0}")]
    MismatchedConfigs(String),
}

/// How UEs arrive. Rates are in UEs per second.
#[derive(Debug, Clone, PartialEq)]
pub enum ArrivalModel {
    Constant([f64; 4]),
    /// Piecewise-constant rates, one row per slot of `slot_len_us`.
    PerSlot { slot_len_us: f64, rates: Vec<[f64; 4]> },
    /// Fixed arrival list `(time_us, sector)`.
    Explicit(Vec<(f64, Sector)>),
}

impl ArrivalModel {
    fn describe(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: f64| {
            for b in v.to_bits().to_le_bytes() {
                h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
            }
        };
        match self {
            ArrivalModel::Constant(r) => format!("constant{:?}", r),
            ArrivalModel::PerSlot { slot_len_us, rates } => {
                rates.iter().flatten().for_each(|v| eat(*v));
                format!("per_slot(len={},n={},h={:016x})", slot_len_us, rates.len(), h)
            }
            ArrivalModel::Explicit(list) => {
                list.iter().for_each(|(t, s)| {
                    eat(*t);
                    eat(s.index() as f64)
                });
                format!("explicit(n={},h={:016x})", list.len(), h)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Time between burst starts.
    pub burst_period_us: f64,
    pub burst_duration_us: f64,
    pub n_ssb: usize,
    /// Arrivals are generated in `[0, horizon_us)`.
    pub horizon_us: f64,
    pub arrivals: ArrivalModel,
    /// Probability that a UE detects one SSB aimed at its sector.
    pub detect_prob: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(arrivals: ArrivalModel, horizon_us: f64, seed: u64) -> Self {
        SimConfig {
            burst_period_us: 20_000.0,
            burst_duration_us: BURST_DURATION_US,
            n_ssb: N_SSB,
            horizon_us,
            arrivals,
            detect_prob: 1.0,
            seed,
        }
    }

    pub fn ssb_duration_us(&self) -> f64 {
        self.burst_duration_us / self.n_ssb as f64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.n_ssb != N_SSB {
            return bad(format!("n_ssb must be {}", N_SSB));
        }
        if !(self.burst_duration_us > 0.0 && self.burst_duration_us < self.burst_period_us) {
            return bad("need 0 < burst_duration < burst_period".into());
        }
        if !self.burst_period_us.is_finite() {
            return bad("burst_period must be finite".into());
        }
        if !(self.horizon_us > 0.0 && self.horizon_us.is_finite()) {
            return bad("horizon must be positive".into());
        }
        if !(self.detect_prob > 0.0 && self.detect_prob <= 1.0) {
            return bad(format!("detect_prob {} outside (0, 1]", self.detect_prob));
        }
        let rate_ok = |r: &[f64; 4]| r.iter().all(|v| v.is_finite() && *v >= 0.0);
        match &self.arrivals {
            ArrivalModel::Constant(r) if !rate_ok(r) => bad("rates must be >= 0".into()),
            ArrivalModel::PerSlot { slot_len_us, rates } => {
                if !(*slot_len_us > 0.0 && slot_len_us.is_finite()) {
                    bad("slot length must be positive".into())
                } else if !rates.iter().all(rate_ok) {
                    bad("rates must be >= 0".into())
                } else {
                    Ok(())
                }
            }
            ArrivalModel::Explicit(list) if list.iter().any(|(t, _)| !(t.is_finite() && *t >= 0.0)) => {
                bad("explicit arrival times must be finite and >= 0".into())
            }
            _ => Ok(()),
        }
    }

    /// Everything except the seed, for checking that reports are comparable.
    pub fn setup_tag(&self) -> String {
        format!(
            "period={} duration={} n_ssb={} horizon={} detect_prob={} arrivals={}",
            self.burst_period_us,
            self.burst_duration_us,
            self.n_ssb,
            self.horizon_us,
            self.detect_prob,
            self.arrivals.describe()
        )
    }
}
