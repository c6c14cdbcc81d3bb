use crate::ingest::SLOT_LEN_MS;

use super::{ArrivalModel, SimConfig, SimError, SweepPolicy};

/// One CDR slot in simulator time.
pub const CDR_SLOT_US: f64 = SLOT_LEN_MS as f64 * 1e3;

/// Replays a stretch of observed counts: during slot `k` sector `s` sees
/// Poisson arrivals at `counts[k][s] · ues_per_cdr` UEs per slot.
pub fn replay_config(counts: &[[f64; 4]], ues_per_cdr: f64, seed: u64) -> Result<SimConfig, SimError> {
    if counts.is_empty() {
        return Err(SimError::InvalidConfig("no slots to replay".into()));
    }
    if !(ues_per_cdr >= 0.0 && ues_per_cdr.is_finite()) {
        return Err(SimError::InvalidConfig(format!("ues_per_cdr {} must be >= 0", ues_per_cdr)));
    }
    let per_second = ues_per_cdr / (CDR_SLOT_US * 1e-6);
    let rates = counts.iter().map(|row| row.map(|c| c * per_second)).collect();
    Ok(SimConfig::new(
        ArrivalModel::PerSlot { slot_len_us: CDR_SLOT_US, rates },
        CDR_SLOT_US * counts.len() as f64,
        seed,
    ))
}

/// `sequential`, `predicted` (ranks by `predictions`) or `oracle` (ranks by
/// the replayed counts themselves).
pub fn named_policy(
    name: &str,
    predictions: Option<&[[f64; 4]]>,
    truths: &[[f64; 4]],
) -> Result<SweepPolicy, SimError> {
    match name {
        "sequential" => Ok(SweepPolicy::sequential()),
        "oracle" => Ok(SweepPolicy::oracle(truths.to_vec(), CDR_SLOT_US)),
        "predicted" => {
            let p = predictions
                .ok_or_else(|| SimError::InvalidConfig("predicted policy needs a model".into()))?;
            if p.len() != truths.len() {
                return Err(SimError::InvalidConfig(format!(
                    "{} predictions for {} slots",
                    p.len(),
                    truths.len()
                )));
            }
            Ok(SweepPolicy::predicted(p.to_vec(), CDR_SLOT_US))
        }
        other => Err(SimError::InvalidConfig(format!(
            "unknown policy {:?} (expected sequential, predicted or oracle)",
            other
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_rates() {
        let cfg = replay_config(&[[6.0, 0.0, 0.0, 12.0]], 10.0, 1).unwrap();
        match &cfg.arrivals {
            ArrivalModel::PerSlot { rates, .. } => assert_eq!(rates[0], [0.1, 0.0, 0.0, 0.2]),
            other => panic!("{:?}", other),
        }
        assert_eq!(cfg.horizon_us, 600e6);
        assert!(replay_config(&[], 1.0, 0).is_err());
    }

    #[test]
    fn policy_names() {
        let t = [[1.0; 4]];
        assert_eq!(named_policy("oracle", None, &t).unwrap().name(), "oracle");
        assert!(named_policy("predicted", None, &t).is_err());
        assert!(named_policy("predicted", Some(&[]), &t).is_err());
        assert!(named_policy("greedy", None, &t).is_err());
    }
}
