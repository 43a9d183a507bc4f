//! Analyses over an ingested [`DataSet`]: indicator traces, ECDFs,
//! attainment functions, performance tables and rankings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use moanytime_core::anytime::{
    self, final_population, make_budget_grid, trajectory, BudgetGrid, CurvePoint, EcdfCell, EcdfCurve,
    PopulationSemantics, Scale, TrajectorySeries,
};
use moanytime_core::eaf::{eaf, eaf_diff, EafDiff, EafGrid};
use moanytime_core::indicators::{
    default_r2_partitions, generate_weights, Indicator, IndicatorKind, NormalizationBounds, NORMALIZED_REFERENCE,
};
use moanytime_core::ranking::{
    bootstrap_ci, friedman, robust_rank, BootstrapConfig, BootstrapInterval, FriedmanResult, PerformanceTable,
    RankingResult,
};
use moanytime_core::stats::mean;
use moanytime_core::{ObjectiveVector, ParetoSet, Solution};

use crate::dataset::{DataSet, RunEntry};
use crate::experiment::{NSGA2_SELECTION, POPULATION_PARAM, SELECTION_PARAM};
use crate::logging::StoreMode;
use crate::refset::read_refset;
use crate::{Error, Result};

/// Confidence level of trace intervals and bootstrap intervals.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
/// Size cap of reference sets extracted from the data.
pub const AUTO_REFSET_SIZE: usize = 1000;

/// Where IGD+ and epsilon reference sets come from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefsetSource {
    /// Extract from the data set for problems without a file.
    pub auto: bool,
    /// File used for every problem without a specific one.
    pub default: Option<PathBuf>,
    pub per_problem: BTreeMap<String, PathBuf>,
}

impl RefsetSource {
    /// Parses `--refset` values: `auto`, `PATH` or `PROBLEM=PATH`.
    pub fn parse<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let mut out = RefsetSource::default();
        for a in args {
            let a = a.as_ref();
            if a == "auto" {
                out.auto = true;
            } else if let Some((p, path)) = a.split_once('=') {
                if p.is_empty() || path.is_empty() {
                    return Err(Error::IndicatorInput(format!("--refset: cannot parse {a:?}")));
                }
                out.per_problem.insert(p.to_string(), PathBuf::from(path));
            } else if out.default.replace(PathBuf::from(a)).is_some() {
                return Err(Error::IndicatorInput(
                    "--refset: more than one file without a PROBLEM= prefix".into(),
                ));
            }
        }
        Ok(out)
    }

    pub fn is_empty(&self) -> bool {
        !self.auto && self.default.is_none() && self.per_problem.is_empty()
    }
}

/// Indicator choice and its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorOptions {
    pub kind: IndicatorKind,
    /// Hypervolume reference point; defaults to 1.1 in every objective.
    pub reference_point: Option<Vec<f64>>,
    pub refset: RefsetSource,
    /// Min-max normalize with per-problem bounds before evaluating.
    pub normalize: bool,
}

impl IndicatorOptions {
    pub fn new(kind: IndicatorKind) -> Self {
        IndicatorOptions {
            kind,
            reference_point: None,
            refset: RefsetSource::default(),
            normalize: true,
        }
    }

    pub fn hypervolume() -> Self {
        Self::new(IndicatorKind::Hypervolume)
    }
}

/// Indicator and normalization bounds prepared for one problem.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: String,
    pub bounds: NormalizationBounds,
    pub indicator: Indicator,
}

/// Core errors raised while evaluating an indicator are input problems.
fn indicator_error(e: moanytime_core::Error) -> Error {
    use moanytime_core::Error as C;
    match e {
        C::Domain(msg) => Error::IndicatorInput(format!("{msg} (multiplicative epsilon needs strictly positive values; try --no-normalize)")),
        other => Error::Core(other),
    }
}

pub fn problem_bounds(ds: &DataSet, problem: &str, normalize: bool) -> Result<NormalizationBounds> {
    if normalize {
        ds.compute_bounds(problem)
    } else {
        Ok(NormalizationBounds::identity(ds.dim(problem)?)?)
    }
}

fn normalized_set(set: &ParetoSet, bounds: &NormalizationBounds, what: &str) -> Result<ParetoSet> {
    if set.dim() != Some(bounds.dim()) {
        return Err(Error::Dimension(format!(
            "{what} has {} objectives, the data has {}",
            set.dim().unwrap_or(0),
            bounds.dim()
        )));
    }
    let points = set
        .points()
        .iter()
        .map(|p| bounds.normalize(p))
        .collect::<moanytime_core::Result<Vec<_>>>()?;
    Ok(ParetoSet::from_points(points)?)
}

/// Builds the indicator of `options` for `problem`, with all inputs mapped
/// into the analysis space.
pub fn prepare(ds: &DataSet, problem: &str, options: &IndicatorOptions) -> Result<Prepared> {
    let bounds = problem_bounds(ds, problem, options.normalize)?;
    let m = bounds.dim();
    let reference_set = || -> Result<ParetoSet> {
        let src = &options.refset;
        let (set, what) = if let Some(path) = src.per_problem.get(problem).or(src.default.as_ref()) {
            (read_refset(path)?, format!("reference set {}", path.display()))
        } else if src.auto {
            (ds.extract_reference_set(problem, AUTO_REFSET_SIZE)?, "extracted reference set".to_string())
        } else {
            return Err(Error::IndicatorInput(format!(
                "--refset is required for {} (no reference set for {problem})",
                options.kind.name()
            )));
        };
        normalized_set(&set, &bounds, &what)
    };
    let indicator = match options.kind {
        IndicatorKind::Hypervolume => {
            let reference = match &options.reference_point {
                Some(r) if r.len() != m => {
                    return Err(Error::IndicatorInput(format!(
                        "--refpoint has {} coordinates, {problem} has {m} objectives",
                        r.len()
                    )))
                }
                Some(r) => ObjectiveVector::new(r.clone())
                    .map_err(|e| Error::IndicatorInput(format!("--refpoint: {e}")))?,
                None => ObjectiveVector::splat(NORMALIZED_REFERENCE, m)?,
            };
            Indicator::Hypervolume { reference }
        }
        IndicatorKind::R2 => Indicator::R2 {
            weights: generate_weights(m, default_r2_partitions(m))?,
        },
        IndicatorKind::IgdPlus => Indicator::IgdPlus {
            reference_set: reference_set()?,
        },
        IndicatorKind::EpsilonAdditive => Indicator::EpsilonAdditive {
            reference_set: reference_set()?,
        },
        IndicatorKind::EpsilonMultiplicative => {
            let reference_set = reference_set()?;
            if reference_set.points().iter().any(|p| p.iter().any(|&v| v <= 0.0)) {
                return Err(Error::IndicatorInput(format!(
                    "multiplicative epsilon needs a strictly positive reference set on {problem}{}",
                    if options.normalize { "; normalization maps the ideal point to 0, try --no-normalize" } else { "" }
                )));
            }
            Indicator::EpsilonMultiplicative { reference_set }
        }
    };
    Ok(Prepared {
        problem: problem.to_string(),
        bounds,
        indicator,
    })
}

/// Largest budget declared by any run.
pub fn max_budget(ds: &DataSet) -> u64 {
    ds.runs().map(|(_, r)| r.meta().budget).max().unwrap_or(1).max(1)
}

/// `make_budget_grid(1, max budget, 50, log)`, or `{1}` for one-evaluation
/// data.
pub fn default_grid(ds: &DataSet) -> Result<BudgetGrid> {
    let hi = max_budget(ds);
    if hi == 1 {
        return Ok(BudgetGrid::from_budgets(vec![1])?);
    }
    Ok(make_budget_grid(1, hi, 50, Scale::Log)?)
}

/// Parses `LO:HI:COUNT[:log|lin]` or a comma-separated budget list.
pub fn parse_budgets(spec: &str) -> Result<BudgetGrid> {
    let bad = |why: &str| Error::Config(format!("--budgets {spec:?}: {why}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad("expected LO:HI:COUNT[:log|lin]"));
        }
        let lo: u64 = parts[0].parse().map_err(|_| bad("LO is not an integer"))?;
        let hi: u64 = parts[1].parse().map_err(|_| bad("HI is not an integer"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("COUNT is not an integer"))?;
        let scale = match parts.get(3).copied() {
            None | Some("log") => Scale::Log,
            Some("lin") | Some("linear") => Scale::Linear,
            Some(_) => return Err(bad("scale must be log or lin")),
        };
        make_budget_grid(lo, hi, count, scale).map_err(|e| bad(&e.to_string()))
    } else {
        let budgets = spec
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad("not a list of integers")))
            .collect::<Result<Vec<_>>>()?;
        BudgetGrid::from_budgets(budgets).map_err(|e| bad(&e.to_string()))
    }
}

fn series_of(run: &RunEntry, prepared: &Prepared, grid: &BudgetGrid) -> Result<TrajectorySeries> {
    trajectory(run.records()?, &prepared.indicator, grid, &prepared.bounds).map_err(indicator_error)
}

/// Aggregated curve of one `(algorithm, problem)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCurve {
    pub algorithm: String,
    pub problem: String,
    pub kind: IndicatorKind,
    pub runs: usize,
    pub points: Vec<CurvePoint>,
}

/// Mean trajectory with a Student-t interval for every `(algorithm,
/// problem)` cell present in the data, ordered by problem then algorithm.
pub fn trace(ds: &DataSet, options: &IndicatorOptions, grid: &BudgetGrid, confidence: f64) -> Result<Vec<TraceCurve>> {
    let mut out = Vec::new();
    for problem in ds.problems() {
        let prepared = prepare(ds, &problem, options)?;
        for algorithm in ds.algorithms() {
            let series = ds
                .runs_for(&algorithm, &problem)
                .map(|r| series_of(r, &prepared, grid))
                .collect::<Result<Vec<_>>>()?;
            if series.is_empty() {
                continue;
            }
            out.push(TraceCurve {
                algorithm: algorithm.clone(),
                problem: problem.clone(),
                kind: options.kind,
                runs: series.len(),
                points: anytime::aggregate(&series, confidence)?,
            });
        }
    }
    Ok(out)
}

/// Hypervolume-fraction ECDF curve per algorithm over every `(problem, run)`
/// cell of the data set.
pub fn ecdf(ds: &DataSet, grid: &BudgetGrid, normalize: bool) -> Result<Vec<EcdfCurve>> {
    let mut bounds = BTreeMap::new();
    for problem in ds.problems() {
        bounds.insert(problem.clone(), problem_bounds(ds, &problem, normalize)?);
    }
    let mut cells = Vec::with_capacity(ds.len());
    for (_, run) in ds.runs() {
        cells.push(EcdfCell {
            algorithm: &run.meta().algorithm,
            records: run.records()?,
            bounds: &bounds[&run.meta().problem],
        });
    }
    Ok(anytime::ecdf(&cells, grid)?)
}

fn require_two_objectives(ds: &DataSet, problem: &str) -> Result<()> {
    let m = ds.dim(problem)?;
    if m != 2 {
        return Err(Error::Dimension(format!(
            "attainment functions need 2 objectives, {problem} has {m}"
        )));
    }
    Ok(())
}

fn normalized_run(records: &[Solution], bounds: &NormalizationBounds) -> Vec<[f64; 2]> {
    records
        .iter()
        .map(|s| {
            let p = bounds.normalize(&s.objectives).expect("dimension checked");
            [p[0], p[1]]
        })
        .collect()
}

fn merged_bounds(a: NormalizationBounds, b: NormalizationBounds) -> Result<NormalizationBounds> {
    let lo: Vec<f64> = a.ideal().iter().zip(b.ideal().iter()).map(|(x, y)| x.min(*y)).collect();
    let hi: Vec<f64> = a.worst().iter().zip(b.worst().iter()).map(|(x, y)| x.max(*y)).collect();
    Ok(NormalizationBounds::new(ObjectiveVector::new(lo)?, ObjectiveVector::new(hi)?)?)
}

/// Attainment function of one `(algorithm, problem)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EafResult {
    pub algorithm: String,
    pub problem: String,
    pub grid: EafGrid,
}

/// Per-cell attainment functions in the analysis space, clipped to `upper`.
pub fn eaf_cells(ds: &DataSet, upper: [f64; 2], normalize: bool) -> Result<Vec<EafResult>> {
    let mut out = Vec::new();
    for problem in ds.problems() {
        require_two_objectives(ds, &problem)?;
        let bounds = problem_bounds(ds, &problem, normalize)?;
        for algorithm in ds.algorithms() {
            let runs = ds
                .runs_for(&algorithm, &problem)
                .map(|r| Ok(normalized_run(r.records()?, &bounds)))
                .collect::<Result<Vec<_>>>()?;
            if runs.is_empty() {
                continue;
            }
            out.push(EafResult {
                algorithm: algorithm.clone(),
                problem: problem.clone(),
                grid: eaf(&runs, upper)?,
            });
        }
    }
    Ok(out)
}

/// Signed attainment difference of one `(algorithm, problem)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EafDiffResult {
    pub algorithm: String,
    pub problem: String,
    pub diff: EafDiff,
}

/// `EAF(a) - EAF(b)` for every `(algorithm, problem)` cell present in both
/// data sets, normalized with bounds spanning both.
pub fn eaf_diff_datasets(a: &DataSet, b: &DataSet, upper: [f64; 2], normalize: bool) -> Result<Vec<EafDiffResult>> {
    let mut out = Vec::new();
    let b_problems: BTreeSet<String> = b.problems().into_iter().collect();
    let b_algorithms: BTreeSet<String> = b.algorithms().into_iter().collect();
    for problem in a.problems().into_iter().filter(|p| b_problems.contains(p)) {
        require_two_objectives(a, &problem)?;
        require_two_objectives(b, &problem)?;
        let bounds = if normalize {
            merged_bounds(a.compute_bounds(&problem)?, b.compute_bounds(&problem)?)?
        } else {
            NormalizationBounds::identity(2)?
        };
        for algorithm in a.algorithms().into_iter().filter(|x| b_algorithms.contains(x)) {
            let side = |ds: &DataSet| {
                ds.runs_for(&algorithm, &problem)
                    .map(|r| Ok(normalized_run(r.records()?, &bounds)))
                    .collect::<Result<Vec<_>>>()
            };
            let (ra, rb) = (side(a)?, side(b)?);
            if ra.is_empty() || rb.is_empty() {
                continue;
            }
            out.push(EafDiffResult {
                algorithm: algorithm.clone(),
                problem: problem.clone(),
                diff: eaf_diff(&ra, &rb, upper)?,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Coverage(
            "the two inputs share no (algorithm, problem) cell".into(),
        ));
    }
    Ok(out)
}

/// Final population of a logged run: NSGA-II runs are replayed, other runs
/// fall back to their last `mu` records. `mu` defaults to the run's
/// `population_size` parameter.
pub fn run_final_population(run: &RunEntry, mu: Option<usize>) -> Result<Vec<Solution>> {
    let meta = run.meta();
    if meta.store_mode != StoreMode::All {
        return Err(Error::Coverage(format!(
            "{} on {} run {} was logged nondominated_only; its population cannot be recovered",
            meta.algorithm, meta.problem, meta.run_id
        )));
    }
    let mu = match mu {
        Some(mu) => mu,
        None => meta
            .params
            .get(POPULATION_PARAM)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| {
                Error::Config(format!(
                    "{} has no {POPULATION_PARAM} parameter; pass --mu",
                    meta.algorithm
                ))
            })?,
    };
    let semantics = if meta.params.get(SELECTION_PARAM).map(String::as_str) == Some(NSGA2_SELECTION) {
        PopulationSemantics::Nsga2Generational
    } else {
        PopulationSemantics::LastRecords
    };
    final_population(run.records()?, mu, semantics).map_err(|e| match e {
        moanytime_core::Error::InvalidArgument(msg) => Error::Coverage(format!(
            "{} on {} run {}: {msg}",
            meta.algorithm, meta.problem, meta.run_id
        )),
        other => Error::Core(other),
    })
}

/// `EAF(archives) - EAF(final populations)` per `(algorithm, problem)`.
pub fn eaf_archive_vs_population(ds: &DataSet, mu: Option<usize>, upper: [f64; 2], normalize: bool) -> Result<Vec<EafDiffResult>> {
    let mut out = Vec::new();
    for problem in ds.problems() {
        require_two_objectives(ds, &problem)?;
        let bounds = problem_bounds(ds, &problem, normalize)?;
        for algorithm in ds.algorithms() {
            let mut archives = Vec::new();
            let mut populations = Vec::new();
            for run in ds.runs_for(&algorithm, &problem) {
                archives.push(normalized_run(run.records()?, &bounds));
                populations.push(normalized_run(&run_final_population(run, mu)?, &bounds));
            }
            if archives.is_empty() {
                continue;
            }
            out.push(EafDiffResult {
                algorithm: algorithm.clone(),
                problem: problem.clone(),
                diff: eaf_diff(&archives, &populations, upper)?,
            });
        }
    }
    Ok(out)
}

fn check_coverage(ds: &DataSet) -> Result<(Vec<String>, Vec<String>)> {
    let algorithms = ds.algorithms();
    let problems = ds.problems();
    for a in &algorithms {
        for p in &problems {
            if ds.runs_for(a, p).next().is_none() {
                return Err(Error::Coverage(format!("no runs of {a} on {p}")));
            }
        }
    }
    Ok((algorithms, problems))
}

/// Per-run trajectories of every `(algorithm, problem)` cell:
/// `series[a][p]` lists `(run_id, values)`.
struct SeriesTable {
    algorithms: Vec<String>,
    problems: Vec<String>,
    series: Vec<Vec<Vec<(u32, Vec<f64>)>>>,
    direction: moanytime_core::indicators::Direction,
}

fn series_table(ds: &DataSet, options: &IndicatorOptions, grid: &BudgetGrid) -> Result<SeriesTable> {
    let (algorithms, problems) = check_coverage(ds)?;
    let mut series = vec![Vec::with_capacity(problems.len()); algorithms.len()];
    for problem in &problems {
        let prepared = prepare(ds, problem, options)?;
        for (a, algorithm) in algorithms.iter().enumerate() {
            let cell = ds
                .runs_for(algorithm, problem)
                .map(|r| Ok((r.meta().run_id, series_of(r, &prepared, grid)?.values)))
                .collect::<Result<Vec<_>>>()?;
            series[a].push(cell);
        }
    }
    Ok(SeriesTable {
        algorithms,
        problems,
        series,
        direction: options.kind.direction(),
    })
}

impl SeriesTable {
    fn performance_table(&self, j: usize) -> Result<PerformanceTable> {
        let values = self
            .series
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| mean(&cell.iter().map(|(_, v)| v[j]).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        Ok(PerformanceTable::new(
            self.algorithms.clone(),
            self.problems.clone(),
            values,
            self.direction,
        )?)
    }

    /// Blocks `(problem, run_id)` with one value per algorithm.
    fn blocks(&self, j: usize) -> Result<(Vec<(String, u32)>, Vec<Vec<f64>>)> {
        let mut labels = Vec::new();
        let mut blocks = Vec::new();
        for (p, problem) in self.problems.iter().enumerate() {
            let ids: Vec<u32> = self.series[0][p].iter().map(|(r, _)| *r).collect();
            for (a, row) in self.series.iter().enumerate() {
                let other: Vec<u32> = row[p].iter().map(|(r, _)| *r).collect();
                if other != ids {
                    return Err(Error::Coverage(format!(
                        "{} and {} have different run ids on {problem}",
                        self.algorithms[0], self.algorithms[a]
                    )));
                }
            }
            for (r, id) in ids.iter().enumerate() {
                labels.push((problem.clone(), *id));
                blocks.push(self.series.iter().map(|row| row[p][r].1[j]).collect());
            }
        }
        Ok((labels, blocks))
    }
}

/// Algorithm × problem table of mean-over-runs indicator values at `budget`.
pub fn performance_table(ds: &DataSet, options: &IndicatorOptions, budget: u64) -> Result<PerformanceTable> {
    let grid = BudgetGrid::from_budgets(vec![budget])?;
    series_table(ds, options, &grid)?.performance_table(0)
}

/// Robust ranking and bootstrap intervals at one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub budget: u64,
    pub table: PerformanceTable,
    pub ranking: RankingResult,
    pub intervals: Vec<BootstrapInterval>,
}

/// One robust ranking per grid budget, all with the seed of `config`.
pub fn rank_over_time(
    ds: &DataSet,
    options: &IndicatorOptions,
    grid: &BudgetGrid,
    config: &BootstrapConfig,
    confidence: f64,
) -> Result<Vec<RankReport>> {
    let table = series_table(ds, options, grid)?;
    grid.budgets()
        .iter()
        .enumerate()
        .map(|(j, &budget)| {
            let perf = table.performance_table(j)?;
            Ok(RankReport {
                budget,
                ranking: robust_rank(&perf, config)?,
                intervals: bootstrap_ci(&perf, config, confidence)?,
                table: perf,
            })
        })
        .collect()
}

/// Friedman test and Nemenyi critical difference at one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CdReport {
    pub budget: u64,
    pub algorithms: Vec<String>,
    pub blocks: Vec<(String, u32)>,
    pub result: FriedmanResult,
}

/// Friedman/Nemenyi analysis per grid budget; every `(problem, run_id)` is
/// one block.
pub fn friedman_over_time(ds: &DataSet, options: &IndicatorOptions, grid: &BudgetGrid, alpha: f64) -> Result<Vec<CdReport>> {
    let table = series_table(ds, options, grid)?;
    grid.budgets()
        .iter()
        .enumerate()
        .map(|(j, &budget)| {
            let (labels, blocks) = table.blocks(j)?;
            Ok(CdReport {
                budget,
                algorithms: table.algorithms.clone(),
                result: friedman(&blocks, table.direction, alpha)?,
                blocks: labels,
            })
        })
        .collect()
}

/// [`friedman_over_time`] at a single budget.
pub fn friedman_cd(ds: &DataSet, options: &IndicatorOptions, budget: u64, alpha: f64) -> Result<CdReport> {
    let grid = BudgetGrid::from_budgets(vec![budget])?;
    Ok(friedman_over_time(ds, options, &grid, alpha)?.remove(0))
}
