use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sector::Sector;
use crate::sweep::{
    build_schedule, rank_sectors_from, sequential_ranking, RankingSource, SectorRanking,
    SweepError, SweepSchedule,
};

/// Source of the sweep schedule for each burst.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepPolicy {
    /// Same ranking every burst.
    Fixed { name: String, ranking: SectorRanking },
    /// Ranking re-derived every burst from the score row of the slot the
    /// burst starts in; ties are re-drawn per burst.
    Scored { name: String, source: RankingSource, slot_len_us: f64, scores: Vec<[f64; 4]> },
}

const TIE_STREAM: u64 = 7;
/// ChaCha words reserved per burst for tie shuffles.
const WORDS_PER_BURST: u128 = 64;

impl SweepPolicy {
    pub fn sequential() -> Self {
        SweepPolicy::Fixed { name: "sequential".into(), ranking: sequential_ranking() }
    }

    pub fn fixed(name: impl Into<String>, order: [Sector; 4]) -> Self {
        SweepPolicy::Fixed {
            name: name.into(),
            ranking: SectorRanking {
                order,
                tie_groups: order.iter().map(|s| vec![*s]).collect(),
                source: RankingSource::Sequential,
            },
        }
    }

    pub fn predicted(scores: Vec<[f64; 4]>, slot_len_us: f64) -> Self {
        SweepPolicy::Scored {
            name: "predicted".into(),
            source: RankingSource::Predicted,
            slot_len_us,
            scores,
        }
    }

    pub fn oracle(scores: Vec<[f64; 4]>, slot_len_us: f64) -> Self {
        SweepPolicy::Scored { name: "oracle".into(), source: RankingSource::Oracle, slot_len_us, scores }
    }

    pub fn name(&self) -> &str {
        match self {
            SweepPolicy::Fixed { name, .. } | SweepPolicy::Scored { name, .. } => name,
        }
    }

    pub fn with_name(mut self, new: impl Into<String>) -> Self {
        match &mut self {
            SweepPolicy::Fixed { name, .. } | SweepPolicy::Scored { name, .. } => *name = new.into(),
        }
        self
    }

    pub(crate) fn validate(&self) -> Result<(), SweepError> {
        if let SweepPolicy::Scored { scores, .. } = self {
            if let Some(bad) = scores.iter().find(|r| r.iter().any(|v| !v.is_finite())) {
                return Err(SweepError::NonFiniteInput(*bad));
            }
        }
        Ok(())
    }

    /// Schedule for burst `burst` starting at `start_us`. Deterministic in
    /// `(seed, burst)`, independent of call order.
    pub fn schedule_for(&self, burst: u64, start_us: f64, seed: u64) -> SweepSchedule {
        match self {
            SweepPolicy::Fixed { ranking, .. } => build_schedule(ranking),
            SweepPolicy::Scored { source, slot_len_us, scores, .. } => {
                if scores.is_empty() {
                    return build_schedule(&sequential_ranking());
                }
                let slot = ((start_us / slot_len_us).floor() as usize).min(scores.len() - 1);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(TIE_STREAM);
                rng.set_word_pos(burst as u128 * WORDS_PER_BURST);
                let ranking = rank_sectors_from(&scores[slot], *source, &mut rng)
                    .expect("scores validated before simulation");
                build_schedule(&ranking)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sector::*;

    #[test]
    fn scored_policy_follows_slot_scores() {
        let p = SweepPolicy::oracle(vec![[0.0, 0.0, 0.0, 9.0], [0.0, 9.0, 1.0, 2.0]], 1000.0);
        assert_eq!(p.schedule_for(0, 0.0, 1).slots[0], D);
        assert_eq!(p.schedule_for(1, 1000.0, 1).slots[..4], [B, D, C, A]);
        // past the last row the last scores stay in force
        assert_eq!(p.schedule_for(9, 9000.0, 1).slots[0], B);
    }

    #[test]
    fn ties_are_redrawn_per_burst_but_reproducible() {
        let p = SweepPolicy::predicted(vec![[1.0; 4]], 1e12);
        let firsts: std::collections::HashSet<_> =
            (0..100).map(|b| p.schedule_for(b, b as f64 * 20e3, 5).slots[0]).collect();
        assert_eq!(firsts.len(), 4);
        assert_eq!(p.schedule_for(17, 0.0, 5), p.schedule_for(17, 0.0, 5));
    }

    #[test]
    fn naming() {
        assert_eq!(SweepPolicy::sequential().name(), "sequential");
        assert_eq!(SweepPolicy::fixed("worst", [A, B, C, D]).with_name("x").name(), "x");
        assert!(SweepPolicy::predicted(vec![[f64::NAN; 4]], 1.0).validate().is_err());
    }
}
