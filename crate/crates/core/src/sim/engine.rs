use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::sector::{Sector, SECTORS};
use crate::sweep::SweepSchedule;

use super::policy::SweepPolicy;
use super::report::{SimReport, UeOutcome};
use super::{ArrivalModel, SimConfig, SimError};

const ARRIVAL_STREAM: u64 = 1;
const DETECT_STREAM: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Arrival(Sector),
    Ssb { burst: u64, index: usize },
}

impl Kind {
    // arrivals at the same instant as an SSB are handled first so they can
    // detect it
    fn priority(self) -> u8 {
        match self {
            Kind::Arrival(_) => 0,
            Kind::Ssb { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.kind.priority().cmp(&self.kind.priority()))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Next arrival after `t` of a Poisson process whose rate is given by
/// `rate_at`, piecewise constant on `[k·len, (k+1)·len)`.
fn next_piecewise(
    t: f64,
    horizon: f64,
    slot_len: f64,
    rate_at: impl Fn(usize) -> f64,
    rng: &mut ChaCha8Rng,
) -> Option<f64> {
    let mut need: f64 = Exp1.sample(rng);
    let mut now = t;
    while now < horizon {
        let k = (now / slot_len).floor() as usize;
        let end = ((k + 1) as f64 * slot_len).min(horizon);
        let rate_per_us = rate_at(k) * 1e-6;
        if rate_per_us > 0.0 {
            let span = end - now;
            if need <= rate_per_us * span {
                return Some(now + need / rate_per_us);
            }
            need -= rate_per_us * span;
        }
        now = end;
    }
    None
}

struct ArrivalSource {
    rngs: Vec<ChaCha8Rng>,
    explicit: VecDeque<(f64, Sector)>,
}

impl ArrivalSource {
    fn new(cfg: &SimConfig) -> Self {
        let rngs = SECTORS
            .iter()
            .map(|s| {
                let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
                r.set_stream(ARRIVAL_STREAM + s.index() as u64);
                r
            })
            .collect();
        let mut explicit = Vec::new();
        if let ArrivalModel::Explicit(list) = &cfg.arrivals {
            explicit = list.iter().copied().filter(|(t, _)| *t < cfg.horizon_us).collect();
            explicit.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        ArrivalSource { rngs, explicit: explicit.into() }
    }

    fn next_for(&mut self, cfg: &SimConfig, sector: Sector, after: f64) -> Option<f64> {
        let s = sector.index();
        let rng = &mut self.rngs[s];
        match &cfg.arrivals {
            ArrivalModel::Constant(rates) => {
                next_piecewise(after, cfg.horizon_us, cfg.horizon_us, |_| rates[s], rng)
            }
            ArrivalModel::PerSlot { slot_len_us, rates } => next_piecewise(
                after,
                cfg.horizon_us,
                *slot_len_us,
                |k| rates.get(k).map_or(0.0, |r| r[s]),
                rng,
            ),
            ArrivalModel::Explicit(_) => None,
        }
    }
}

struct Loop<'a> {
    cfg: &'a SimConfig,
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl Loop<'_> {
    fn push(&mut self, time: f64, kind: Kind) {
        self.heap.push(Event { time, seq: self.seq, kind });
        self.seq += 1;
    }

    fn ssb_start(&self, burst: u64, index: usize) -> f64 {
        burst as f64 * self.cfg.burst_period_us + index as f64 * self.cfg.ssb_duration_us()
    }

    /// First SSB opportunity starting at or after `t`.
    fn next_ssb_at_or_after(&self, t: f64) -> (u64, usize) {
        let period = self.cfg.burst_period_us;
        let mut burst = (t / period).floor().max(0.0) as u64;
        let into = t - burst as f64 * period;
        let mut index = (into / self.cfg.ssb_duration_us()).ceil().max(0.0) as usize;
        while index > 0 && self.ssb_start(burst, index - 1) >= t {
            index -= 1;
        }
        while index < self.cfg.n_ssb && self.ssb_start(burst, index) < t {
            index += 1;
        }
        if index >= self.cfg.n_ssb {
            burst += 1;
            index = 0;
        }
        (burst, index)
    }
}

/// Runs one seeded cell-search simulation under `policy`.
pub fn simulate(cfg: &SimConfig, policy: &SweepPolicy) -> Result<SimReport, SimError> {
    cfg.validate()?;
    policy.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;

    let mut sources = ArrivalSource::new(cfg);
    let mut detect_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    detect_rng.set_stream(DETECT_STREAM);

    let mut ev = Loop { cfg, heap: BinaryHeap::new(), seq: 0 };
    match &cfg.arrivals {
        ArrivalModel::Explicit(_) => {
            for (t, s) in sources.explicit.drain(..) {
                ev.push(t, Kind::Arrival(s));
            }
        }
        _ => {
            for s in SECTORS {
                if let Some(t) = sources.next_for(cfg, s, 0.0) {
                    ev.push(t, Kind::Arrival(s));
                }
            }
        }
    }

    let mut ues: Vec<(f64, Sector, Option<f64>)> = Vec::new();
    let mut pending: [Vec<usize>; 4] = Default::default();
    let mut ssb_queued = false;
    let mut current: Option<(u64, SweepSchedule)> = None;

    while let Some(Event { time, kind, .. }) = ev.heap.pop() {
        match kind {
            Kind::Arrival(sector) => {
                pending[sector.index()].push(ues.len());
                ues.push((time, sector, None));
                if let Some(t) = sources.next_for(cfg, sector, time) {
                    ev.push(t, Kind::Arrival(sector));
                }
                if !ssb_queued {
                    let (burst, index) = ev.next_ssb_at_or_after(time);
                    ev.push(ev.ssb_start(burst, index), Kind::Ssb { burst, index });
                    ssb_queued = true;
                }
            }
            Kind::Ssb { burst, index } => {
                let schedule = match current {
                    Some((b, s)) if b == burst => s,
                    _ => {
                        let start = ev.ssb_start(burst, 0);
                        let s = policy.schedule_for(burst, start, cfg.seed);
                        current = Some((burst, s));
                        s
                    }
                };
                let waiting = &mut pending[schedule.slots[index].index()];
                waiting.retain(|&id| {
                    let hit = cfg.detect_prob >= 1.0 || detect_rng.random::<f64>() < cfg.detect_prob;
                    if hit {
                        ues[id].2 = Some(time);
                    }
                    !hit
                });
                if pending.iter().any(|p| !p.is_empty()) {
                    let (b, i) = if index + 1 < cfg.n_ssb { (burst, index + 1) } else { (burst + 1, 0) };
                    ev.push(ev.ssb_start(b, i), Kind::Ssb { burst: b, index: i });
                } else {
                    ssb_queued = false;
                }
            }
        }
    }

    let outcomes = ues
        .into_iter()
        .enumerate()
        .map(|(ue_id, (arrival_us, sector, detect))| {
            let detect = detect.expect("every UE is detected before the queue drains");
            UeOutcome { ue_id, sector, arrival_us, delay_us: detect - arrival_us }
        })
        .collect();
    Ok(SimReport::new(policy.name().to_string(), cfg.seed, cfg.setup_tag(), outcomes))
}

/// Every `(policy, seed)` combination, in parallel. Reports come back
/// ordered by policy, then by seed as given.
pub fn simulate_many(
    base: &SimConfig,
    policies: &[SweepPolicy],
    seeds: &[u64],
) -> Result<Vec<SimReport>, SimError> {
    let jobs: Vec<(&SweepPolicy, u64)> =
        policies.iter().flat_map(|p| seeds.iter().map(move |&s| (p, s))).collect();
    jobs.par_iter()
        .map(|(p, seed)| simulate(&SimConfig { seed: *seed, ..base.clone() }, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SSB_DURATION_US;
    use Sector::*;

    fn single(t: f64, s: Sector) -> SimConfig {
        SimConfig::new(ArrivalModel::Explicit(vec![(t, s)]), 1e6, 0)
    }

    #[test]
    fn first_slot_match_has_zero_delay() {
        let policy = SweepPolicy::fixed("dabc", [D, A, B, C]);
        let r = simulate(&single(20_000.0, D), &policy).unwrap();
        assert_eq!(r.ues.len(), 1);
        assert_eq!(r.ues[0].delay_us, 0.0);
    }

    #[test]
    fn sequential_sweep_reaches_d_in_third_slot_offset() {
        let r = simulate(&single(40_000.0, D), &SweepPolicy::sequential()).unwrap();
        assert!((r.ues[0].delay_us - 3.0 * 250.0 / 14.0).abs() < 1e-9);
        assert!((r.ues[0].delay_us - 53.571).abs() < 1e-3);
    }

    #[test]
    fn just_missed_waits_for_next_burst() {
        // D's last SSB in the sequential burst is index 11
        let t = 11.0 * SSB_DURATION_US + 1e-6;
        let r = simulate(&single(t, D), &SweepPolicy::sequential()).unwrap();
        let d = r.ues[0].delay_us;
        assert!((d - (20_000.0 + 3.0 * SSB_DURATION_US - t)).abs() < 1e-6);
        assert!(d < 20_000.0 + 250.0);
    }

    #[test]
    fn mid_burst_arrival_catches_later_slot() {
        let t = 20_000.0 + 1.5 * SSB_DURATION_US;
        let r = simulate(&single(t, A), &SweepPolicy::sequential()).unwrap();
        assert!((r.ues[0].delay_us - (2.5 * SSB_DURATION_US)).abs() < 1e-9);
    }

    #[test]
    fn zero_rates_give_empty_report() {
        let cfg = SimConfig::new(ArrivalModel::Constant([0.0; 4]), 1e7, 3);
        let r = simulate(&cfg, &SweepPolicy::sequential()).unwrap();
        assert_eq!(r.overall.n, 0);
        assert!(r.overall.mean.is_none());
    }

    #[test]
    fn seeded_runs_repeat_and_bound_delays() {
        let mut cfg = SimConfig::new(ArrivalModel::Constant([50.0, 10.0, 5.0, 100.0]), 2e6, 11);
        let a = simulate(&cfg, &SweepPolicy::sequential()).unwrap();
        let b = simulate(&cfg, &SweepPolicy::sequential()).unwrap();
        assert_eq!(a, b);
        assert!(a.ues.len() > 200);
        assert!(a.ues.iter().all(|u| u.delay_us >= 0.0 && u.delay_us < 20_250.0));
        assert!(a.ues.windows(2).all(|w| w[0].arrival_us <= w[1].arrival_us));

        cfg.detect_prob = 0.3;
        let c = simulate(&cfg, &SweepPolicy::sequential()).unwrap();
        assert_eq!(c.ues.len(), a.ues.len());
        assert!(c.overall.mean.unwrap() > a.overall.mean.unwrap());
        assert!(c.ues.iter().any(|u| u.delay_us > 20_250.0));
    }

    #[test]
    fn arrival_streams_match_across_policies() {
        let cfg = SimConfig::new(ArrivalModel::Constant([20.0; 4]), 1e6, 4);
        let a = simulate(&cfg, &SweepPolicy::sequential()).unwrap();
        let b = simulate(&cfg, &SweepPolicy::fixed("rev", [D, C, B, A])).unwrap();
        let arr = |r: &SimReport| r.ues.iter().map(|u| (u.arrival_us, u.sector)).collect::<Vec<_>>();
        assert_eq!(arr(&a), arr(&b));
    }

    #[test]
    fn piecewise_rates_respect_zero_slots() {
        let cfg = SimConfig::new(
            ArrivalModel::PerSlot { slot_len_us: 1e6, rates: vec![[100.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0, 0.0, 0.0, 100.0]] },
            3e6,
            2,
        );
        let r = simulate(&cfg, &SweepPolicy::sequential()).unwrap();
        assert!(r.ues.len() > 100);
        for u in &r.ues {
            match u.sector {
                A => assert!(u.arrival_us < 1e6),
                D => assert!(u.arrival_us >= 2e6),
                _ => panic!("no arrivals expected in B or C"),
            }
        }
    }

    #[test]
    fn next_ssb_lookup() {
        let cfg = single(0.0, A);
        let ev = Loop { cfg: &cfg, heap: BinaryHeap::new(), seq: 0 };
        assert_eq!(ev.next_ssb_at_or_after(0.0), (0, 0));
        assert_eq!(ev.next_ssb_at_or_after(1e-9), (0, 1));
        assert_eq!(ev.next_ssb_at_or_after(SSB_DURATION_US), (0, 1));
        assert_eq!(ev.next_ssb_at_or_after(240.0), (1, 0));
        assert_eq!(ev.next_ssb_at_or_after(19_999.0), (1, 0));
    }
}
