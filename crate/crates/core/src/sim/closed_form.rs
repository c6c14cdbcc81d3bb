use crate::sector::SECTORS;
use crate::sweep::SweepSchedule;

use super::{SimConfig, SimError};

/// Mean delay for a UE arriving at a uniformly random phase of the burst
/// period against a schedule that repeats every burst, with certain
/// detection.
///
/// For a sector whose SSBs start at offsets `o_1 < … < o_m` the delay from
/// phase `φ` is the distance to the next offset (wrapping to the next
/// burst), so its mean is `Σ g² / (2P)` over the cyclic gaps `g` between
/// consecutive offsets.
pub fn expected_delay_static(
    schedule: &SweepSchedule,
    shares: &[f64; 4],
    cfg: &SimConfig,
) -> Result<f64, SimError> {
    cfg.validate()?;
    if cfg.detect_prob != 1.0 {
        return Err(SimError::InvalidConfig("closed form requires detect_prob = 1".into()));
    }
    let total: f64 = shares.iter().sum();
    if shares.iter().any(|s| !(s.is_finite() && *s >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(SimError::BadShares(*shares));
    }

    let period = cfg.burst_period_us;
    let d = cfg.ssb_duration_us();
    let mut expected = 0.0;
    for s in SECTORS {
        let share = shares[s.index()];
        if share == 0.0 {
            continue;
        }
        let offsets: Vec<f64> = schedule.slots_of(s).iter().map(|&i| i as f64 * d).collect();
        let (Some(first), Some(last)) = (offsets.first(), offsets.last()) else {
            return Err(SimError::UnservedSector(s));
        };
        let wrap = period - last + first;
        let inner: f64 = offsets.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        expected += share * (inner + wrap * wrap) / (2.0 * period);
    }
    Ok(expected)
}
