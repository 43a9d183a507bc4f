//! Anytime analysis of unbounded archives: budget grids, indicator
//! trajectories evaluated lazily at grid points, mean curves with Student-t
//! confidence bands, the hypervolume-fraction ECDF, and reconstruction of a
//! final population from a logged run.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log, round, sqrt};

use crate::algorithms::select_survivors;
use crate::indicators::{max_normalized_hypervolume, Indicator, IndicatorKind, NormalizationBounds};
use crate::objective::weakly_dominates;
use crate::stats::{mean, sample_std, student_t_quantile};
use crate::{Error, Result, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Log,
    Linear,
}

/// Strictly increasing evaluation budgets, all at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetGrid {
    budgets: Vec<u64>,
    scale: Option<Scale>,
}

impl BudgetGrid {
    /// A grid from an explicit list of budgets.
    pub fn from_budgets(budgets: Vec<u64>) -> Result<Self> {
        if budgets.is_empty() {
            return Err(Error::Empty("budget grid"));
        }
        if budgets[0] == 0 {
            return Err(Error::InvalidArgument("budgets must be positive".into()));
        }
        if budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "budgets must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            budgets,
            scale: None,
        })
    }

    pub fn budgets(&self) -> &[u64] {
        &self.budgets
    }

    /// The spacing the grid was generated with; `None` for explicit lists.
    pub fn scale(&self) -> Option<Scale> {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.budgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.budgets.is_empty()
    }

    pub fn last(&self) -> u64 {
        *self.budgets.last().expect("grids are non-empty")
    }
}

/// `count` budgets between `lo` and `hi` inclusive, evenly spaced on the
/// given scale, rounded to integers and deduplicated.
pub fn make_budget_grid(lo: u64, hi: u64, count: usize, scale: Scale) -> Result<BudgetGrid> {
    if lo < 1 || lo >= hi {
        return Err(Error::InvalidArgument(alloc::format!(
            "budget range needs 1 <= lo < hi, got {lo}..{hi}"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "budget grid needs at least 2 points, got {count}"
        )));
    }
    let (a, b) = match scale {
        Scale::Log => (log(lo as f64), log(hi as f64)),
        Scale::Linear => (lo as f64, hi as f64),
    };
    let mut budgets = Vec::with_capacity(count);
    for i in 0..count {
        let budget = if i == 0 {
            lo
        } else if i == count - 1 {
            hi
        } else {
            let t = a + (b - a) * i as f64 / (count - 1) as f64;
            let v = match scale {
                Scale::Log => exp(t),
                Scale::Linear => t,
            };
            (round(v) as u64).clamp(lo, hi)
        };
        budgets.push(budget);
    }
    budgets.dedup();
    Ok(BudgetGrid {
        budgets,
        scale: Some(scale),
    })
}

/// Indicator values of one run at the budgets of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySeries {
    pub kind: IndicatorKind,
    pub budgets: Vec<u64>,
    pub values: Vec<f64>,
}

/// Non-dominated set maintained under insertion; weakly dominated newcomers
/// are rejected, so duplicates are stored once.
#[derive(Debug, Clone, Default)]
struct Front {
    points: Vec<Vec<f64>>,
}

impl Front {
    fn insert(&mut self, p: Vec<f64>) -> bool {
        if self.points.iter().any(|q| weakly_dominates(q, &p)) {
            return false;
        }
        self.points.retain(|q| !weakly_dominates(&p, q));
        self.points.push(p);
        true
    }
}

/// Indicator trajectory of a run.
///
/// At each budget `b` the value is the indicator of the non-dominated subset
/// of the normalized records with `eval_index <= b`. Records must be ordered
/// by evaluation index. The indicator is evaluated only at grid points, and
/// only when the front changed since the previous one. Budgets past the last
/// record see the whole archive. An empty prefix has hypervolume 0; the other
/// indicators are undefined there and report an error.
pub fn trajectory(
    records: &[Solution],
    indicator: &Indicator,
    grid: &BudgetGrid,
    bounds: &NormalizationBounds,
) -> Result<TrajectorySeries> {
    let m = bounds.dim();
    if indicator.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: indicator.dim(),
        });
    }
    let mut front = Front::default();
    let mut values = Vec::with_capacity(grid.len());
    let mut next = 0;
    let mut cached: Option<f64> = None;
    let mut last_index = 0;
    for &budget in grid.budgets() {
        while next < records.len() && records[next].eval_index <= budget {
            let r = &records[next];
            if r.eval_index <= last_index && next > 0 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "evaluation indices must increase, found {} after {last_index}",
                    r.eval_index
                )));
            }
            last_index = r.eval_index;
            if r.objectives.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: r.objectives.dim(),
                });
            }
            if front.insert(bounds.normalize_unchecked(&r.objectives)) {
                cached = None;
            }
            next += 1;
        }
        let value = match cached {
            Some(v) => v,
            None if front.points.is_empty() => match indicator {
                Indicator::Hypervolume { .. } => 0.0,
                _ => return Err(Error::Empty("archive prefix")),
            },
            None => indicator.evaluate(&front.points)?,
        };
        cached = Some(value);
        values.push(value);
    }
    Ok(TrajectorySeries {
        kind: indicator.kind(),
        budgets: grid.budgets().to_vec(),
        values,
    })
}

/// One point of an aggregated curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub budget: u64,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Mean over series with a two-sided Student-t interval at `confidence`.
/// A single series yields a degenerate interval.
pub fn aggregate(series: &[TrajectorySeries], confidence: f64) -> Result<Vec<CurvePoint>> {
    let first = series.first().ok_or(Error::Empty("series list"))?;
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if series.iter().any(|s| s.budgets != first.budgets) {
        return Err(Error::InvalidArgument(
            "series were evaluated on different budget grids".into(),
        ));
    }
    let n = series.len();
    let t = if n > 1 {
        student_t_quantile(1.0 - (1.0 - confidence) / 2.0, (n - 1) as f64)
    } else {
        0.0
    };
    let mut column = Vec::with_capacity(n);
    Ok(first
        .budgets
        .iter()
        .enumerate()
        .map(|(j, &budget)| {
            column.clear();
            column.extend(series.iter().map(|s| s.values[j]));
            let mu = mean(&column);
            let half = if n > 1 {
                t * sample_std(&column) / sqrt(n as f64)
            } else {
                0.0
            };
            CurvePoint {
                budget,
                mean: mu,
                lo: mu - half,
                hi: mu + half,
            }
        })
        .collect())
}

/// One `(problem, run)` cell of an ECDF.
#[derive(Debug, Clone, Copy)]
pub struct EcdfCell<'a> {
    pub algorithm: &'a str,
    pub records: &'a [Solution],
    pub bounds: &'a NormalizationBounds,
}

/// Mean hypervolume fraction per budget of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfCurve {
    pub algorithm: String,
    pub budgets: Vec<u64>,
    pub values: Vec<f64>,
}

/// Hypervolume-fraction ECDF: for every algorithm and budget, the mean over
/// its cells of the hypervolume fraction of the archive prefix. Every cell
/// weighs the same. Curves are ordered by algorithm name.
pub fn ecdf(cells: &[EcdfCell<'_>], grid: &BudgetGrid) -> Result<Vec<EcdfCurve>> {
    if cells.is_empty() {
        return Err(Error::Empty("ECDF selection"));
    }
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for cell in cells {
        let m = cell.bounds.dim();
        let hv = Indicator::normalized_hypervolume(m)?;
        let series = trajectory(cell.records, &hv, grid, cell.bounds)?;
        let scale = max_normalized_hypervolume(m);
        let entry = sums
            .entry(cell.algorithm)
            .or_insert_with(|| (alloc::vec![0.0; grid.len()], 0));
        for (acc, v) in entry.0.iter_mut().zip(&series.values) {
            *acc += v / scale;
        }
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(algorithm, (total, count))| EcdfCurve {
            algorithm: algorithm.into(),
            budgets: grid.budgets().to_vec(),
            values: total.into_iter().map(|t| t / count as f64).collect(),
        })
        .collect())
}

/// How the population of a logged run is recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationSemantics {
    /// Replay generational NSGA-II selection over the stream.
    Nsga2Generational,
    /// The last `mu` records; the fallback for algorithms whose selection
    /// cannot be replayed.
    LastRecords,
}

/// Final population of size `mu` of a run stored with every evaluation.
///
/// The NSGA-II replay takes the first `mu` records as the initial population
/// and then merges each following block of `mu` records (the last block may
/// be shorter) with the population, keeping the survivors of the same
/// selection the live algorithm uses.
pub fn final_population(records: &[Solution], mu: usize, semantics: PopulationSemantics) -> Result<Vec<Solution>> {
    if mu == 0 {
        return Err(Error::InvalidArgument("population size must be positive".into()));
    }
    if records.len() < mu {
        return Err(Error::InvalidArgument(alloc::format!(
            "run has {} records, fewer than the population size {mu}",
            records.len()
        )));
    }
    match semantics {
        PopulationSemantics::LastRecords => Ok(records[records.len() - mu..].to_vec()),
        PopulationSemantics::Nsga2Generational => {
            let mut population: Vec<&Solution> = records[..mu].iter().collect();
            for block in records[mu..].chunks(mu) {
                let pool: Vec<&Solution> = population.iter().copied().chain(block).collect();
                let keyed: Vec<(u64, &[f64])> = pool
                    .iter()
                    .map(|s| (s.eval_index, s.objectives.as_slice()))
                    .collect();
                population = select_survivors(&keyed, mu)
                    .into_iter()
                    .map(|i| pool[i])
                    .collect();
            }
            Ok(population.into_iter().cloned().collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicators::hv_fraction;
    use crate::ObjectiveVector;
    use alloc::vec;

    fn record(i: u64, f: &[f64]) -> Solution {
        Solution::new(i, ObjectiveVector::new(f.to_vec()).unwrap())
    }

    #[test]
    fn grids() {
        assert_eq!(make_budget_grid(1, 100, 3, Scale::Log).unwrap().budgets(), &[1, 10, 100]);
        let g = make_budget_grid(100, 50_000, 8, Scale::Log).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!((g.budgets()[0], g.last()), (100, 50_000));
        assert_eq!(make_budget_grid(10, 20, 2, Scale::Linear).unwrap().budgets(), &[10, 20]);
        // collisions after rounding collapse
        assert_eq!(make_budget_grid(1, 3, 10, Scale::Linear).unwrap().budgets(), &[1, 2, 3]);
        assert!(make_budget_grid(5, 5, 3, Scale::Log).is_err());
        assert!(make_budget_grid(0, 5, 3, Scale::Log).is_err());
        assert!(make_budget_grid(1, 5, 1, Scale::Log).is_err());
        assert!(BudgetGrid::from_budgets(vec![3, 3]).is_err());
    }

    #[test]
    fn toy_hypervolume_trajectory() {
        let run = [record(1, &[1.0, 1.0]), record(2, &[0.5, 0.5]), record(3, &[0.8, 0.2])];
        let bounds = NormalizationBounds::identity(2).unwrap();
        let hv = Indicator::normalized_hypervolume(2).unwrap();
        let grid = BudgetGrid::from_budgets(vec![1, 2, 3]).unwrap();
        let s = trajectory(&run, &hv, &grid, &bounds).unwrap();
        let expected = [0.01, 0.36, 0.45];
        for (v, e) in s.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        let beyond = BudgetGrid::from_budgets(vec![50]).unwrap();
        let s = trajectory(&run, &hv, &beyond, &bounds).unwrap();
        assert!((s.values[0] - 0.45).abs() < 1e-12);
    }

    #[test]
    fn empty_prefix() {
        let run = [record(5, &[0.5, 0.5])];
        let bounds = NormalizationBounds::identity(2).unwrap();
        let grid = BudgetGrid::from_budgets(vec![1, 5]).unwrap();
        let hv = Indicator::normalized_hypervolume(2).unwrap();
        assert_eq!(trajectory(&run, &hv, &grid, &bounds).unwrap().values[0], 0.0);
        let r2 = Indicator::default_r2(2).unwrap();
        assert!(trajectory(&run, &r2, &grid, &bounds).is_err());
    }

    #[test]
    fn aggregation() {
        let mk = |v: f64| TrajectorySeries {
            kind: IndicatorKind::Hypervolume,
            budgets: vec![10],
            values: vec![v],
        };
        let c = aggregate(&[mk(0.2), mk(0.4)], 0.95).unwrap();
        assert!((c[0].mean - 0.3).abs() < 1e-15);
        // t_{0.975,1} * s / sqrt(2) with s = 0.1414...
        assert!((c[0].hi - c[0].mean - 12.706_204_736_174_7 * 0.1).abs() < 1e-9);
        let same = aggregate(&vec![mk(0.7); 5], 0.95).unwrap();
        assert_eq!((same[0].lo, same[0].hi), (0.7, 0.7));
        let single = aggregate(&[mk(0.7)], 0.95).unwrap();
        assert_eq!((single[0].lo, single[0].hi), (0.7, 0.7));
        let mut other = mk(0.1);
        other.budgets = vec![11];
        assert!(aggregate(&[mk(0.2), other], 0.95).is_err());
        assert!(aggregate(&[], 0.95).is_err());
    }

    #[test]
    fn ecdf_of_single_run() {
        let run = [record(1, &[1.0, 1.0]), record(2, &[0.0, 0.0])];
        let bounds = NormalizationBounds::from_points(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let grid = BudgetGrid::from_budgets(vec![1, 2]).unwrap();
        let curves = ecdf(
            &[EcdfCell {
                algorithm: "A",
                records: &run,
                bounds: &bounds,
            }],
            &grid,
        )
        .unwrap();
        assert_eq!(curves.len(), 1);
        let expected = hv_fraction(&[[1.0, 1.0]], &bounds).unwrap();
        assert_eq!(curves[0].values[0], expected);
        assert!((curves[0].values[1] - 1.0).abs() < 1e-15);
        assert!(ecdf(&[], &grid).is_err());
    }

    #[test]
    fn population_fallback_and_errors() {
        let run: Vec<Solution> = (1..=30).map(|i| record(i, &[i as f64, 0.0])).collect();
        let last = final_population(&run, 10, PopulationSemantics::LastRecords).unwrap();
        assert_eq!(last.first().unwrap().eval_index, 21);
        assert!(final_population(&run[..5], 10, PopulationSemantics::Nsga2Generational).is_err());
    }
}
