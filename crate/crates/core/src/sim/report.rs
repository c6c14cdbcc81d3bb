use std::collections::BTreeMap;
use std::io::Write;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::sector::{Sector, SECTORS};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeOutcome {
    pub ue_id: usize,
    pub sector: Sector,
    pub arrival_us: f64,
    pub delay_us: f64,
}

/// Summary of a set of delays; statistics are `None` when empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats {
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Nearest-rank 95th percentile.
    pub p95: Option<f64>,
}

impl DelayStats {
    pub fn from_delays(delays: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = delays.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return DelayStats { n, mean: None, median: None, p95: None };
        }
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        DelayStats { n, mean: Some(mean), median: Some(median), p95: Some(v[rank - 1]) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub policy: String,
    pub seed: u64,
    /// Config fingerprint without the seed.
    pub setup: String,
    pub ues: Vec<UeOutcome>,
    pub overall: DelayStats,
    pub per_sector: [DelayStats; 4],
}

impl SimReport {
    pub fn new(policy: String, seed: u64, setup: String, ues: Vec<UeOutcome>) -> Self {
        let overall = DelayStats::from_delays(ues.iter().map(|u| u.delay_us));
        let per_sector = SECTORS.map(|s| {
            DelayStats::from_delays(ues.iter().filter(|u| u.sector == s).map(|u| u.delay_us))
        });
        SimReport { policy, seed, setup, ues, overall, per_sector }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{:.6}", x)).unwrap_or_default()
}

/// `policy,seed,ue_id,sector,arrival_us,delay_us`
pub fn write_reports_csv<W: Write>(reports: &[SimReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "policy,seed,ue_id,sector,arrival_us,delay_us")?;
    for r in reports {
        for u in &r.ues {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6}",
                r.policy, r.seed, u.ue_id, u.sector, u.arrival_us, u.delay_us
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub policy: String,
    pub stats: DelayStats,
}

fn policy_order(reports: &[SimReport]) -> Vec<&str> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.policy.as_str()) {
            names.push(&r.policy);
        }
    }
    names
}

/// Delay statistics pooled over all seeds, one entry per policy in order
/// of first appearance.
pub fn summarize(reports: &[SimReport]) -> Vec<PolicySummary> {
    policy_order(reports)
        .into_iter()
        .map(|name| PolicySummary {
            policy: name.to_string(),
            stats: DelayStats::from_delays(
                reports
                    .iter()
                    .filter(|r| r.policy == name)
                    .flat_map(|r| r.ues.iter().map(|u| u.delay_us)),
            ),
        })
        .collect()
}

/// `policy,mean_us,median_us,p95_us,n`
pub fn write_summary_csv<W: Write>(summary: &[PolicySummary], mut out: W) -> std::io::Result<()> {
    writeln!(out, "policy,mean_us,median_us,p95_us,n")?;
    for s in summary {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.policy,
            opt(s.stats.mean),
            opt(s.stats.median),
            opt(s.stats.p95),
            s.stats.n
        )?;
    }
    Ok(())
}

/// One policy against the baseline (the first policy), paired by seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: String,
    /// Per-seed mean delay, in seed order.
    pub seed_means: Vec<(u64, Option<f64>)>,
    pub mean_of_means: Option<f64>,
    /// `policy − baseline` per seed where both are defined.
    pub diffs: Vec<(u64, f64)>,
    pub mean_diff: Option<f64>,
    /// 95% Student-t interval on the mean paired difference.
    pub ci95: Option<(f64, f64)>,
    /// Seeds where this policy's mean delay is lower / higher / equal.
    pub lower: usize,
    pub higher: usize,
    pub equal: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
}

pub fn compare(reports: &[SimReport]) -> Result<Comparison, SimError> {
    let names = policy_order(reports);
    let Some(&baseline) = names.first() else {
        return Ok(Comparison { baseline: String::new(), seeds: vec![], rows: vec![] });
    };
    let setup = &reports[0].setup;
    if let Some(r) = reports.iter().find(|r| &r.setup != setup) {
        return Err(SimError::MismatchedConfigs(format!(
            "policy {} seed {} ran with a different config",
            r.policy, r.seed
        )));
    }

    let by_policy: Vec<BTreeMap<u64, Option<f64>>> = names
        .iter()
        .map(|name| {
            let mut m = BTreeMap::new();
            for r in reports.iter().filter(|r| r.policy == *name) {
                m.insert(r.seed, r.overall.mean);
            }
            m
        })
        .collect();
    let seeds: Vec<u64> = by_policy[0].keys().copied().collect();
    for (name, m) in names.iter().zip(&by_policy) {
        if !m.keys().copied().eq(seeds.iter().copied()) {
            return Err(SimError::MismatchedConfigs(format!(
                "policy {} was run on different seeds than {}",
                name, baseline
            )));
        }
    }

    let base = &by_policy[0];
    let rows = names
        .iter()
        .zip(&by_policy)
        .map(|(name, m)| {
            let seed_means: Vec<(u64, Option<f64>)> = m.iter().map(|(s, v)| (*s, *v)).collect();
            let defined: Vec<f64> = seed_means.iter().filter_map(|(_, v)| *v).collect();
            let mean_of_means =
                (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            let diffs: Vec<(u64, f64)> = seed_means
                .iter()
                .filter_map(|(s, v)| Some((*s, (*v)? - base[s]?)))
                .collect();
            let n = diffs.len();
            let mean_diff = (n > 0).then(|| diffs.iter().map(|d| d.1).sum::<f64>() / n as f64);
            let ci95 = mean_diff.filter(|_| n >= 2).map(|md| {
                let var = diffs.iter().map(|d| (d.1 - md).powi(2)).sum::<f64>() / (n - 1) as f64;
                let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                    .map(|d| d.inverse_cdf(0.975))
                    .unwrap_or(f64::NAN);
                let half = t * (var / n as f64).sqrt();
                (md - half, md + half)
            });
            ComparisonRow {
                policy: name.to_string(),
                lower: diffs.iter().filter(|d| d.1 < 0.0).count(),
                higher: diffs.iter().filter(|d| d.1 > 0.0).count(),
                equal: diffs.iter().filter(|d| d.1 == 0.0).count(),
                seed_means,
                mean_of_means,
                diffs,
                mean_diff,
                ci95,
            }
        })
        .collect();
    Ok(Comparison { baseline: baseline.to_string(), seeds, rows })
}

impl Comparison {
    pub fn row(&self, policy: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }

    /// `policy,baseline,n_seeds,mean_delay_us,mean_diff_us,ci95_low_us,ci95_high_us,lower,higher,equal`
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "policy,baseline,n_seeds,mean_delay_us,mean_diff_us,ci95_low_us,ci95_high_us,lower,higher,equal"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.policy,
                self.baseline,
                r.seed_means.len(),
                opt(r.mean_of_means),
                opt(r.mean_diff),
                opt(r.ci95.map(|c| c.0)),
                opt(r.ci95.map(|c| c.1)),
                r.lower,
                r.higher,
                r.equal
            )?;
        }
        Ok(())
    }
}

/// `seed,policy,mean_us,diff_vs_baseline_us`
pub fn write_paired_csv<W: Write>(cmp: &Comparison, mut out: W) -> std::io::Result<()> {
    writeln!(out, "seed,policy,mean_us,diff_vs_baseline_us")?;
    for (i, seed) in cmp.seeds.iter().enumerate() {
        for r in &cmp.rows {
            let diff = r.diffs.iter().find(|d| d.0 == *seed).map(|d| d.1);
            writeln!(out, "{},{},{},{}", seed, r.policy, opt(r.seed_means[i].1), opt(diff))?;
        }
    }
    Ok(())
}
