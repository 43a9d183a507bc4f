//! Robust bootstrap ranking of algorithms over problem instances, bootstrap
//! confidence intervals of the aggregate performance, and Friedman tests
//! with Nemenyi critical differences.
//!
//! A resample draws as many instances as the table has, uniformly with
//! replacement, and aggregates every algorithm's values over the drawn
//! instances. `a` wins a resample against `b` when its aggregate is strictly
//! better; exact ties count one half for each side. `a` beats `b`
//! significantly when it wins at least a `1 - alpha` fraction of the
//! resamples (and more than half of them). Groups are the strongly connected
//! components of the graph with an edge for every significant beat and edges
//! both ways for every pair where neither beats the other, which merges tied
//! algorithms transitively; the components are listed best first.

use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;
use rand::Rng;

use crate::indicators::Direction;
use crate::rng::{resample_seed, rng_from_seed};
use crate::stats::{chi_square_sf, fractional_ranks, mean, median, quantile_sorted};
use crate::{Error, Result};

/// Algorithm × instance matrix of indicator values.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceTable {
    algorithms: Vec<String>,
    instances: Vec<String>,
    values: Vec<Vec<f64>>,
    direction: Direction,
}

impl PerformanceTable {
    /// `values[a][i]` is the value of algorithm `a` on instance `i`.
    pub fn new(
        algorithms: Vec<String>,
        instances: Vec<String>,
        values: Vec<Vec<f64>>,
        direction: Direction,
    ) -> Result<Self> {
        if algorithms.is_empty() {
            return Err(Error::Empty("algorithm list"));
        }
        if instances.is_empty() {
            return Err(Error::Empty("instance list"));
        }
        if values.len() != algorithms.len() {
            return Err(Error::DimensionMismatch {
                expected: algorithms.len(),
                found: values.len(),
            });
        }
        for row in &values {
            if row.len() != instances.len() {
                return Err(Error::DimensionMismatch {
                    expected: instances.len(),
                    found: row.len(),
                });
            }
            if let Some((index, &value)) = row.iter().enumerate().find(|(_, v)| v.is_nan()) {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(Self {
            algorithms,
            instances,
            values,
            direction,
        })
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn instances(&self) -> &[String] {
        &self.instances
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    /// `n_samples` seeded uniform resamples.
    Random,
    /// Every one of the `k^k` ordered resamples of `k` instances exactly
    /// once; `n_samples` is ignored.
    Exhaustive,
}

/// Largest resample count the exhaustive mode will enumerate.
pub const MAX_EXHAUSTIVE_RESAMPLES: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub n_samples: usize,
    pub alpha: f64,
    pub seed: u64,
    pub aggregator: Aggregator,
    pub resampling: Resampling,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            alpha: 0.05,
            seed: 0,
            aggregator: Aggregator::Mean,
            resampling: Resampling::Random,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 && self.resampling == Resampling::Random {
            return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub algorithms: Vec<String>,
    /// Best group first; members ordered by mean rank.
    pub groups: Vec<Vec<String>>,
    /// `win_fraction[a][b]`: share of resamples where `a` beats `b`.
    pub win_fraction: Vec<Vec<f64>>,
    /// Mean over resamples of each algorithm's rank (1 = best).
    pub mean_rank: Vec<f64>,
}

/// Instance indices of every resample, in order.
fn resamples(k: usize, config: &BootstrapConfig) -> Result<Vec<Vec<usize>>> {
    match config.resampling {
        Resampling::Random => Ok((0..config.n_samples as u64)
            .map(|s| {
                let mut rng = rng_from_seed(resample_seed(config.seed, s));
                (0..k).map(|_| rng.random_range(0..k)).collect()
            })
            .collect()),
        Resampling::Exhaustive => {
            let total = (k as u64)
                .checked_pow(k as u32)
                .filter(|&t| t <= MAX_EXHAUSTIVE_RESAMPLES)
                .ok_or_else(|| {
                    Error::InvalidArgument(alloc::format!(
                        "{k} instances are too many to enumerate every resample"
                    ))
                })?;
            Ok((0..total)
                .map(|mut s| {
                    (0..k)
                        .map(|_| {
                            let d = (s % k as u64) as usize;
                            s /= k as u64;
                            d
                        })
                        .collect()
                })
                .collect())
        }
    }
}

/// Per-resample aggregates, `[resample][algorithm]`.
fn resample_aggregates(table: &PerformanceTable, config: &BootstrapConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let k = table.instances.len();
    let mut picked = Vec::with_capacity(k);
    Ok(resamples(k, config)?
        .into_iter()
        .map(|draw| {
            table
                .values
                .iter()
                .map(|row| {
                    picked.clear();
                    picked.extend(draw.iter().map(|&i| row[i]));
                    match config.aggregator {
                        Aggregator::Mean => mean(&picked),
                        Aggregator::Median => median(&picked),
                    }
                })
                .collect()
        })
        .collect())
}

/// Ranks with 1 for the best value under `direction`.
fn directed_ranks(values: &[f64], direction: Direction) -> Vec<f64> {
    match direction {
        Direction::Minimize => fractional_ranks(values),
        Direction::Maximize => {
            let negated: Vec<f64> = values.iter().map(|v| -v).collect();
            fractional_ranks(&negated)
        }
    }
}

pub fn robust_rank(table: &PerformanceTable, config: &BootstrapConfig) -> Result<RankingResult> {
    let aggregates = resample_aggregates(table, config)?;
    let n = table.algorithms.len();
    let samples = aggregates.len() as f64;
    let mut wins = alloc::vec![alloc::vec![0.0; n]; n];
    let mut rank_sum = alloc::vec![0.0; n];
    for agg in &aggregates {
        for a in 0..n {
            for b in 0..n {
                if table.direction.better(agg[a], agg[b]) {
                    wins[a][b] += 1.0;
                } else if agg[a] == agg[b] {
                    wins[a][b] += 0.5;
                }
            }
        }
        for (s, r) in rank_sum.iter_mut().zip(directed_ranks(agg, table.direction)) {
            *s += r;
        }
    }
    let win_fraction: Vec<Vec<f64>> = wins
        .into_iter()
        .map(|row| row.into_iter().map(|w| w / samples).collect())
        .collect();
    let mean_rank: Vec<f64> = rank_sum.into_iter().map(|s| s / samples).collect();
    let groups = tie_groups(&win_fraction, &mean_rank, config.alpha)
        .into_iter()
        .map(|g| g.into_iter().map(|i| table.algorithms[i].clone()).collect())
        .collect();
    Ok(RankingResult {
        algorithms: table.algorithms.clone(),
        groups,
        win_fraction,
        mean_rank,
    })
}

fn beats(win_fraction: &[Vec<f64>], a: usize, b: usize, alpha: f64) -> bool {
    let w = win_fraction[a][b];
    w >= 1.0 - alpha && w > 0.5
}

fn by_mean_rank(mean_rank: &[f64]) -> impl Fn(&usize, &usize) -> core::cmp::Ordering + '_ {
    |&a, &b| mean_rank[a].total_cmp(&mean_rank[b]).then(a.cmp(&b))
}

fn tie_groups(win_fraction: &[Vec<f64>], mean_rank: &[f64], alpha: f64) -> Vec<Vec<usize>> {
    let n = win_fraction.len();
    let mut reach = alloc::vec![alloc::vec![false; n]; n];
    for a in 0..n {
        reach[a][a] = true;
        for b in 0..n {
            if a != b && !beats(win_fraction, b, a, alpha) {
                // a beats b, or neither beats the other
                reach[a][b] = true;
            }
        }
    }
    for via in 0..n {
        for a in 0..n {
            if reach[a][via] {
                for b in 0..n {
                    if reach[via][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    let mut assigned = alloc::vec![false; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if assigned[a] {
            continue;
        }
        let mut g: Vec<usize> = (0..n).filter(|&b| reach[a][b] && reach[b][a]).collect();
        for &b in &g {
            assigned[b] = true;
        }
        g.sort_by(by_mean_rank(mean_rank));
        groups.push(g);
    }
    // every pair across two groups is a one-directional significant beat,
    // so the component order is total: more reachable means better
    let reachable = |g: &Vec<usize>| reach[g[0]].iter().filter(|&&r| r).count();
    groups.sort_by(|g, h| {
        reachable(h)
            .cmp(&reachable(g))
            .then_with(|| by_mean_rank(mean_rank)(&g[0], &h[0]))
    });
    groups
}

/// Percentile interval and median of one algorithm's resampled aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapInterval {
    pub lo: f64,
    pub median: f64,
    pub hi: f64,
}

/// Bootstrap distribution summaries from the same resamples `robust_rank`
/// draws under the same configuration.
pub fn bootstrap_ci(table: &PerformanceTable, config: &BootstrapConfig, confidence: f64) -> Result<Vec<BootstrapInterval>> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let aggregates = resample_aggregates(table, config)?;
    let tail = (1.0 - confidence) / 2.0;
    Ok((0..table.algorithms.len())
        .map(|a| {
            let mut column: Vec<f64> = aggregates.iter().map(|agg| agg[a]).collect();
            column.sort_by(f64::total_cmp);
            BootstrapInterval {
                lo: quantile_sorted(&column, tail),
                median: quantile_sorted(&column, 0.5),
                hi: quantile_sorted(&column, 1.0 - tail),
            }
        })
        .collect())
}

/// Nemenyi constants `q_alpha` (studentized range over sqrt 2, infinite
/// degrees of freedom) for `k = 2..=20`.
const NEMENYI_Q_01: [f64; 19] = [
    2.576, 2.913, 3.113, 3.255, 3.364, 3.452, 3.526, 3.590, 3.646, 3.696, 3.741, 3.781, 3.818,
    3.853, 3.884, 3.914, 3.941, 3.967, 3.992,
];
const NEMENYI_Q_05: [f64; 19] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354,
    3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
];
const NEMENYI_Q_10: [f64; 19] = [
    1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120,
    3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
];

/// `q_alpha` for `k` algorithms; available for alpha in {0.01, 0.05, 0.10}
/// and `2 <= k <= 20`.
pub fn nemenyi_q(alpha: f64, k: usize) -> Result<f64> {
    let table = if alpha == 0.01 {
        &NEMENYI_Q_01
    } else if alpha == 0.05 {
        &NEMENYI_Q_05
    } else if alpha == 0.10 {
        &NEMENYI_Q_10
    } else {
        return Err(Error::InvalidArgument(alloc::format!(
            "no Nemenyi constants for alpha {alpha}; use 0.01, 0.05 or 0.1"
        )));
    };
    k.checked_sub(2)
        .and_then(|i| table.get(i).copied())
        .ok_or_else(|| {
            Error::InvalidArgument(alloc::format!(
                "Nemenyi constants cover 2 to 20 algorithms, got {k}"
            ))
        })
}

/// `q_alpha * sqrt(k (k + 1) / (6 N))`.
pub fn critical_difference(alpha: f64, k: usize, blocks: usize) -> Result<f64> {
    Ok(nemenyi_q(alpha, k)? * sqrt((k * (k + 1)) as f64 / (6 * blocks) as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub average_ranks: Vec<f64>,
    pub statistic: f64,
    pub p_value: f64,
    pub critical_difference: f64,
}

/// Friedman test over `blocks[j][a]` (one row per block, one column per
/// algorithm) with tie-corrected statistic, plus the Nemenyi critical
/// difference at `alpha`. Rank 1 is the best value under `direction`.
pub fn friedman(blocks: &[Vec<f64>], direction: Direction, alpha: f64) -> Result<FriedmanResult> {
    if blocks.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "the Friedman test needs at least 2 blocks, got {}",
            blocks.len()
        )));
    }
    let k = blocks[0].len();
    if k < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "the Friedman test needs at least 2 algorithms, got {k}"
        )));
    }
    if let Some(row) = blocks.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: row.len(),
        });
    }
    let n = blocks.len() as f64;
    let kf = k as f64;
    let mut rank_sums = alloc::vec![0.0; k];
    let mut tie_term = 0.0;
    for row in blocks {
        if row.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("NaN in Friedman block".into()));
        }
        let ranks = directed_ranks(row, direction);
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        let mut sorted = ranks;
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            let t = (j - i) as f64;
            tie_term += t * t * t - t;
            i = j;
        }
    }
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (n * kf * (kf + 1.0)) * sum_sq - 3.0 * n * (kf + 1.0);
    let correction = 1.0 - tie_term / (n * kf * (kf * kf - 1.0));
    let statistic = if correction <= 0.0 { 0.0 } else { (raw / correction).max(0.0) };
    let p_value = if correction <= 0.0 {
        1.0
    } else {
        chi_square_sf(statistic, kf - 1.0)
    };
    Ok(FriedmanResult {
        average_ranks: rank_sums.into_iter().map(|s| s / n).collect(),
        statistic,
        p_value,
        critical_difference: critical_difference(alpha, k, blocks.len())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn table(values: Vec<Vec<f64>>, direction: Direction) -> PerformanceTable {
        let algorithms = (0..values.len()).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
        let instances = (0..values[0].len()).map(|i| i.to_string()).collect();
        PerformanceTable::new(algorithms, instances, values, direction).unwrap()
    }

    fn names(groups: &[Vec<String>]) -> Vec<Vec<&str>> {
        groups.iter().map(|g| g.iter().map(String::as_str).collect()).collect()
    }

    #[test]
    fn dominant_algorithm_separates() {
        let t = table(vec![vec![0.9, 0.8, 0.7], vec![0.5, 0.4, 0.3]], Direction::Maximize);
        let r = robust_rank(&t, &BootstrapConfig::default()).unwrap();
        assert_eq!(names(&r.groups), [["A"], ["B"]]);
        assert_eq!(r.win_fraction[0][1], 1.0);
        assert_eq!(r.win_fraction[1][0], 0.0);
    }

    #[test]
    fn identical_algorithms_tie() {
        let t = table(vec![vec![0.3, 0.1], vec![0.3, 0.1]], Direction::Minimize);
        let r = robust_rank(&t, &BootstrapConfig::default()).unwrap();
        assert_eq!(names(&r.groups), [["A", "B"]]);
        assert_eq!(r.win_fraction[0][1], 0.5);
    }

    #[test]
    fn single_algorithm() {
        let t = table(vec![vec![0.3, 0.1]], Direction::Minimize);
        let r = robust_rank(&t, &BootstrapConfig::default()).unwrap();
        assert_eq!(names(&r.groups), [["A"]]);
    }

    #[test]
    fn exhaustive_two_instance_interval() {
        let t = table(vec![vec![0.0, 1.0]], Direction::Maximize);
        let config = BootstrapConfig {
            resampling: Resampling::Exhaustive,
            ..BootstrapConfig::default()
        };
        let ci = bootstrap_ci(&t, &config, 0.95).unwrap();
        assert_eq!(ci[0].median, 0.5);
        assert!(ci[0].lo < 0.5 && ci[0].hi > 0.5);
        let one = BootstrapConfig {
            n_samples: 1,
            ..BootstrapConfig::default()
        };
        let ci = bootstrap_ci(&t, &one, 0.95).unwrap();
        assert_eq!(ci[0].lo, ci[0].hi);
        let constant = table(vec![vec![0.4; 3]], Direction::Maximize);
        let ci = bootstrap_ci(&constant, &BootstrapConfig::default(), 0.95).unwrap();
        assert_eq!((ci[0].lo, ci[0].median, ci[0].hi), (0.4, 0.4, 0.4));
    }

    #[test]
    fn config_errors() {
        let t = table(vec![vec![0.0, 1.0]], Direction::Maximize);
        let bad = BootstrapConfig {
            alpha: 1.0,
            ..BootstrapConfig::default()
        };
        assert!(robust_rank(&t, &bad).is_err());
        let bad = BootstrapConfig {
            n_samples: 0,
            ..BootstrapConfig::default()
        };
        assert!(robust_rank(&t, &bad).is_err());
    }

    #[test]
    fn friedman_examples() {
        let blocks: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64 + 1.0]).collect();
        let f = friedman(&blocks, Direction::Minimize, 0.05).unwrap();
        assert_eq!(f.average_ranks, [1.0, 2.0]);
        assert!(f.p_value < 0.01);

        let tied = vec![vec![0.5; 3]; 20];
        let f = friedman(&tied, Direction::Minimize, 0.05).unwrap();
        assert_eq!(f.average_ranks, [2.0, 2.0, 2.0]);
        assert_eq!(f.p_value, 1.0);
        assert!((f.critical_difference - 2.343 * sqrt(12.0 / 120.0)).abs() < 1e-15);

        assert!(friedman(&tied[..1], Direction::Minimize, 0.05).is_err());
        assert!(friedman(&tied, Direction::Minimize, 0.2).is_err());
    }

    #[test]
    fn nemenyi_constants() {
        assert_eq!(nemenyi_q(0.05, 2).unwrap(), 1.960);
        assert_eq!(nemenyi_q(0.05, 3).unwrap(), 2.343);
        assert_eq!(nemenyi_q(0.10, 20).unwrap(), 3.319);
        assert!(nemenyi_q(0.05, 21).is_err());
        assert!(nemenyi_q(0.05, 1).is_err());
    }
}
