//! The `moanytime` command line.
//!
//! Exit codes: 0 success, 1 other failures (I/O, corrupt files), 2
//! configuration or usage errors, 3 indicator-input errors, 4
//! dimensionality errors, 5 data-coverage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use moanytime_core::anytime::BudgetGrid;
use moanytime_core::indicators::{IndicatorKind, NORMALIZED_REFERENCE};
use moanytime_core::ranking::{Aggregator, BootstrapConfig, Resampling};
use serde_json::json;

use crate::analysis::{self, IndicatorOptions, RefsetSource, DEFAULT_CONFIDENCE};
use crate::dataset::{ingest, DataSet};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::export::{heat_chart, line_chart, surface_chart, HeatRect, LineSeries, Table, Value};
use crate::refset::write_refset;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "moanytime", version, about = "Anytime benchmarking of multi-objective optimizers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankMethod {
    Bootstrap,
    Cd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregatorArg {
    Mean,
    Median,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment described by a JSON configuration file.
    Run {
        /// Experiment configuration (JSON).
        config: PathBuf,
        /// Output directory; overrides `output_dir` of the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean indicator curves with confidence bands per (algorithm, problem).
    Trace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        indicator: IndicatorArgs,
        /// Confidence level of the Student-t bands.
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        confidence: f64,
    },
    /// Hypervolume-fraction ECDF per algorithm over all problems and runs.
    Ecdf {
        #[command(flatten)]
        common: Common,
        /// Evaluate in raw objective space instead of min-max normalized.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Empirical attainment functions of 2-objective data.
    Eaf {
        #[command(flatten)]
        common: Common,
        /// Second experiment directory; output is EAF(input) - EAF(against).
        #[arg(long, conflicts_with = "final_population")]
        against: Option<PathBuf>,
        /// Compare full archives against replayed final populations.
        #[arg(long)]
        final_population: bool,
        /// Population size for --final-population (default: from run params).
        #[arg(long)]
        mu: Option<usize>,
        /// Export the k-th attainment surface instead of the cells.
        #[arg(long, conflicts_with_all = ["against", "final_population"])]
        level: Option<usize>,
        /// Upper corner of the analysed box (default 1.1,1.1).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        refpoint: Option<Vec<f64>>,
        /// Use raw objective values instead of min-max normalized ones.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Robust bootstrap ranking or Friedman/Nemenyi ranks over budgets.
    Rank {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        indicator: IndicatorArgs,
        #[arg(long, value_enum, default_value_t = RankMethod::Bootstrap)]
        method: RankMethod,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Bootstrap resamples.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = AggregatorArg::Mean)]
        aggregator: AggregatorArg,
        /// Enumerate every resample instead of drawing --samples.
        #[arg(long)]
        exhaustive: bool,
        /// Confidence level of the bootstrap intervals.
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        confidence: f64,
    },
    /// Extract a reference set from logged data.
    Refset {
        /// Experiment directory.
        #[arg(long)]
        input: PathBuf,
        /// Problem whose runs are pooled.
        #[arg(long)]
        problem: String,
        /// Maximum number of points kept.
        #[arg(long, default_value_t = 1000)]
        max: usize,
        /// Reference-set file to write.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment directory (searched recursively).
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory (`rank`: output file, stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; `rank` defaults to json, the others to csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// `LO:HI:COUNT[:log|lin]` or a comma-separated list; default
    /// `1:<max budget>:50:log`.
    #[arg(long)]
    pub budgets: Option<String>,
    /// Only analyse these algorithms (repeatable).
    #[arg(long = "algorithm")]
    pub algorithms: Vec<String>,
    /// Only analyse these problems (repeatable).
    #[arg(long = "problem")]
    pub problems: Vec<String>,
}

impl Common {
    fn ingest(&self, dir: &Path) -> Result<DataSet> {
        let keep = |m: &crate::RunMeta| {
            (self.algorithms.is_empty() || self.algorithms.contains(&m.algorithm))
                && (self.problems.is_empty() || self.problems.contains(&m.problem))
        };
        ingest(dir, Some(&keep))
    }
}

#[derive(Debug, Args)]
pub struct IndicatorArgs {
    /// hv, igdplus, r2, epsadd or epsmul.
    #[arg(long, default_value = "hv")]
    pub indicator: String,
    /// Hypervolume reference point (default 1.1 in every objective).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub refpoint: Option<Vec<f64>>,
    /// Reference set: PATH, PROBLEM=PATH (repeatable) or `auto`.
    #[arg(long)]
    pub refset: Vec<String>,
    /// Evaluate in raw objective space instead of min-max normalized.
    #[arg(long)]
    pub no_normalize: bool,
}

impl IndicatorArgs {
    fn options(&self) -> Result<IndicatorOptions> {
        let kind = IndicatorKind::from_name(&self.indicator).ok_or_else(|| {
            Error::IndicatorInput(format!(
                "--indicator: unknown indicator {:?} (expected hv, igdplus, r2, epsadd or epsmul)",
                self.indicator
            ))
        })?;
        if self.refpoint.is_some() && kind != IndicatorKind::Hypervolume {
            return Err(Error::IndicatorInput(format!("--refpoint is not used by {}", kind.name())));
        }
        Ok(IndicatorOptions {
            kind,
            reference_point: self.refpoint.clone(),
            refset: RefsetSource::parse(&self.refset)?,
            normalize: !self.no_normalize,
        })
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; messages go to `stdout` and `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn grid_for(ds: &DataSet, spec: &Option<String>) -> Result<BudgetGrid> {
    match spec {
        Some(s) => analysis::parse_budgets(s),
        None => analysis::default_grid(ds),
    }
}

fn out_dir(common: &Common) -> Result<&Path> {
    let dir = common
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("--out DIR is required".into()))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Json => table.to_json(),
        _ => table.to_csv(),
    }
}

fn check_confidence(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("--confidence must lie in (0, 1), got {c}")))
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(out) = out {
                cfg.output_dir = out.clone();
            }
            run_experiment(&cfg, |s| {
                let _ = writeln!(stdout, "{s}");
            })?;
            Ok(())
        }
        Command::Trace { common, indicator, confidence } => {
            check_confidence(*confidence)?;
            let options = indicator.options()?;
            let ds = common.ingest(&common.input)?;
            let grid = grid_for(&ds, &common.budgets)?;
            let curves = analysis::trace(&ds, &options, &grid, *confidence)?;
            let dir = out_dir(common)?;
            let format = common.format.unwrap_or_default();
            let name = options.kind.name();
            let mut by_problem: Vec<(String, Vec<(String, Table)>)> = Vec::new();
            for c in &curves {
                let mut t = Table::new(["budget", "mean", "ci_lo", "ci_hi"]);
                for p in &c.points {
                    t.push(vec![p.budget.into(), p.mean.into(), p.lo.into(), p.hi.into()]);
                }
                match by_problem.last_mut() {
                    Some((p, v)) if *p == c.problem => v.push((c.algorithm.clone(), t)),
                    _ => by_problem.push((c.problem.clone(), vec![(c.algorithm.clone(), t)])),
                }
            }
            for (problem, cells) in &by_problem {
                if format == Format::Svg {
                    let mut all = Table::new(["algorithm", "budget", "mean", "ci_lo", "ci_hi"]);
                    let mut series = Vec::new();
                    for (alg, t) in cells {
                        all.extend(t.with_leading("algorithm", alg));
                        series.push(LineSeries {
                            label: alg.clone(),
                            points: floats(t, &[0, 1, 2, 3]),
                            band: true,
                        });
                    }
                    let svg = line_chart(&format!("{name} on {problem}"), "evaluations", name, &series, true, &all.to_csv());
                    write_file(&dir.join(format!("{name}_{problem}.svg")), &svg)?;
                } else {
                    for (alg, t) in cells {
                        write_file(&dir.join(format!("{name}_{alg}_{problem}.{}", format.ext())), &render(t, format))?;
                    }
                }
            }
            Ok(())
        }
        Command::Ecdf { common, no_normalize } => {
            let ds = common.ingest(&common.input)?;
            let grid = grid_for(&ds, &common.budgets)?;
            let curves = analysis::ecdf(&ds, &grid, !no_normalize)?;
            let dir = out_dir(common)?;
            let format = common.format.unwrap_or_default();
            let tables: Vec<(String, Table)> = curves
                .iter()
                .map(|c| {
                    let mut t = Table::new(["budget", "fraction"]);
                    for (b, v) in c.budgets.iter().zip(&c.values) {
                        t.push(vec![(*b).into(), (*v).into()]);
                    }
                    (c.algorithm.clone(), t)
                })
                .collect();
            if format == Format::Svg {
                let mut all = Table::new(["algorithm", "budget", "fraction"]);
                let mut series = Vec::new();
                for (alg, t) in &tables {
                    all.extend(t.with_leading("algorithm", alg));
                    let pts = floats(t, &[0, 1, 1, 1]);
                    series.push(LineSeries { label: alg.clone(), points: pts, band: false });
                }
                let svg = line_chart("hypervolume-fraction ECDF", "evaluations", "fraction", &series, true, &all.to_csv());
                write_file(&dir.join("ecdf.svg"), &svg)
            } else {
                for (alg, t) in &tables {
                    write_file(&dir.join(format!("ecdf_{alg}.{}", format.ext())), &render(t, format))?;
                }
                Ok(())
            }
        }
        Command::Eaf { common, against, final_population, mu, level, refpoint, no_normalize } => {
            let upper = match refpoint.as_deref() {
                None => [NORMALIZED_REFERENCE; 2],
                Some([x, y]) if x.is_finite() && y.is_finite() => [*x, *y],
                Some(_) => return Err(Error::IndicatorInput("--refpoint: expected two finite values".into())),
            };
            let ds = common.ingest(&common.input)?;
            let dir = out_dir(common)?;
            let format = common.format.unwrap_or_default();
            let normalize = !no_normalize;
            let lo = if normalize { [0.0, 0.0] } else { data_lower(&ds)? };
            if let Some(k) = level {
                for r in analysis::eaf_cells(&ds, upper, normalize)? {
                    let surface = r.grid.attainment_surface(*k).map_err(|e| Error::Config(format!("--level: {e}")))?;
                    let mut t = Table::new(["f1", "f2"]);
                    let mut pts = Vec::new();
                    for p in surface.points() {
                        t.push(vec![p[0].into(), p[1].into()]);
                        pts.push([p[0], p[1]]);
                    }
                    let stem = format!("surface_k{k}_{}_{}", r.algorithm, r.problem);
                    let text = if format == Format::Svg {
                        surface_chart(&format!("{k}-attainment surface of {} on {}", r.algorithm, r.problem), &[(r.algorithm.clone(), pts)], upper, &t.to_csv())
                    } else {
                        render(&t, format)
                    };
                    write_file(&dir.join(format!("{stem}.{}", format.ext())), &text)?;
                }
                return Ok(());
            }
            let (prefix, cells): (&str, Vec<(String, String, Vec<HeatRect>)>) = if against.is_some() || *final_population {
                let diffs = match against {
                    Some(b) => analysis::eaf_diff_datasets(&ds, &common.ingest(b)?, upper, normalize)?,
                    None => analysis::eaf_archive_vs_population(&ds, *mu, upper, normalize)?,
                };
                let cells = diffs
                    .into_iter()
                    .map(|d| {
                        let rects = d
                            .diff
                            .cells()
                            .iter()
                            .map(|c| HeatRect { x_lo: c.x_lo, y_lo: c.y_lo, x_hi: c.x_hi, y_hi: c.y_hi, value: d.diff.cell_fraction(c) })
                            .collect();
                        (d.algorithm, d.problem, rects)
                    })
                    .collect();
                ("eafdiff", cells)
            } else {
                let cells = analysis::eaf_cells(&ds, upper, normalize)?
                    .into_iter()
                    .map(|r| {
                        let n = r.grid.n_runs() as f64;
                        let rects = r
                            .grid
                            .cells()
                            .iter()
                            .map(|c| HeatRect { x_lo: c.x_lo, y_lo: c.y_lo, x_hi: c.x_hi, y_hi: c.y_hi, value: c.count as f64 / n })
                            .collect();
                        (r.algorithm, r.problem, rects)
                    })
                    .collect();
                ("eaf", cells)
            };
            for (alg, problem, rects) in cells {
                let mut t = Table::new(["x_lo", "y_lo", "x_hi", "y_hi", "fraction"]);
                for r in &rects {
                    t.push(vec![r.x_lo.into(), r.y_lo.into(), r.x_hi.into(), r.y_hi.into(), r.value.into()]);
                }
                let text = if format == Format::Svg {
                    heat_chart(&format!("{prefix} of {alg} on {problem}"), &rects, lo, upper, &t.to_csv())
                } else {
                    render(&t, format)
                };
                write_file(&dir.join(format!("{prefix}_{alg}_{problem}.{}", format.ext())), &text)?;
            }
            Ok(())
        }
        Command::Rank { common, indicator, method, alpha, samples, seed, aggregator, exhaustive, confidence } => {
            check_confidence(*confidence)?;
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(Error::Config(format!("--alpha must lie in (0, 1), got {alpha}")));
            }
            if *samples == 0 {
                return Err(Error::Config("--samples must be at least 1".into()));
            }
            let options = indicator.options()?;
            let ds = common.ingest(&common.input)?;
            let grid = grid_for(&ds, &common.budgets)?;
            let format = common.format.unwrap_or(Format::Json);
            let (json_report, table, series) = match method {
                RankMethod::Bootstrap => {
                    let config = BootstrapConfig {
                        n_samples: *samples,
                        alpha: *alpha,
                        seed: *seed,
                        aggregator: match aggregator {
                            AggregatorArg::Mean => Aggregator::Mean,
                            AggregatorArg::Median => Aggregator::Median,
                        },
                        resampling: if *exhaustive { Resampling::Exhaustive } else { Resampling::Random },
                    };
                    bootstrap_report(&analysis::rank_over_time(&ds, &options, &grid, &config, *confidence)?, &options)
                }
                RankMethod::Cd => cd_report(&analysis::friedman_over_time(&ds, &options, &grid, *alpha)?, &options),
            };
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&json_report).expect("report serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => table.to_csv(),
                Format::Svg => line_chart("rank over time", "evaluations", "mean rank", &series, true, &table.to_csv()),
            };
            match &common.out {
                Some(path) => {
                    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                    }
                    write_file(path, &text)
                }
                None => stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
            }
        }
        Command::Refset { input, problem, max, out } => {
            if *max == 0 {
                return Err(Error::Config("--max must be at least 1".into()));
            }
            let ds = ingest(input, None)?;
            let set = ds.extract_reference_set(problem, *max)?;
            write_refset(out, &set)
        }
    }
}

/// Columns of a table as `(x, y, lo, hi)` tuples.
fn floats(t: &Table, cols: &[usize; 4]) -> Vec<(f64, f64, f64, f64)> {
    let f = |v: &Value| match v {
        Value::Float(x) => *x,
        Value::Int(i) => *i as f64,
        Value::Str(_) => f64::NAN,
    };
    t.rows
        .iter()
        .map(|r| (f(&r[cols[0]]), f(&r[cols[1]]), f(&r[cols[2]]), f(&r[cols[3]])))
        .collect()
}

fn data_lower(ds: &DataSet) -> Result<[f64; 2]> {
    let mut lo = [f64::INFINITY; 2];
    for p in ds.problems() {
        let b = ds.compute_bounds(&p)?;
        if b.dim() == 2 {
            lo = [lo[0].min(b.ideal()[0]), lo[1].min(b.ideal()[1])];
        }
    }
    Ok(if lo[0].is_finite() { lo } else { [0.0, 0.0] })
}

fn bootstrap_report(reports: &[analysis::RankReport], options: &IndicatorOptions) -> (serde_json::Value, Table, Vec<LineSeries>) {
    let mut table = Table::new(["budget", "algorithm", "group", "mean_rank", "ci_lo", "ci_median", "ci_hi"]);
    let algorithms = reports.first().map(|r| r.ranking.algorithms.clone()).unwrap_or_default();
    let mut series: Vec<LineSeries> = algorithms
        .iter()
        .map(|a| LineSeries { label: a.clone(), points: Vec::new(), band: false })
        .collect();
    let mut entries = Vec::new();
    for r in reports {
        let group_of = |a: &str| r.ranking.groups.iter().position(|g| g.iter().any(|x| x == a)).unwrap_or(0) + 1;
        for (i, a) in r.ranking.algorithms.iter().enumerate() {
            let ci = &r.intervals[i];
            table.push(vec![
                r.budget.into(),
                a.as_str().into(),
                group_of(a).into(),
                r.ranking.mean_rank[i].into(),
                ci.lo.into(),
                ci.median.into(),
                ci.hi.into(),
            ]);
            let mr = r.ranking.mean_rank[i];
            series[i].points.push((r.budget as f64, mr, mr, mr));
        }
        let intervals: Vec<_> = r
            .ranking
            .algorithms
            .iter()
            .zip(&r.intervals)
            .map(|(a, ci)| json!({"algorithm": a, "lo": ci.lo, "median": ci.median, "hi": ci.hi}))
            .collect();
        entries.push(json!({
            "budget": r.budget,
            "algorithms": r.ranking.algorithms,
            "groups": r.ranking.groups,
            "win_fraction": r.ranking.win_fraction,
            "mean_rank": r.ranking.mean_rank,
            "bootstrap_ci": intervals,
            "performance": r.table.values(),
            "instances": r.table.instances(),
        }));
    }
    let report = json!({
        "method": "bootstrap",
        "indicator": options.kind.name(),
        "rankings": entries,
    });
    (report, table, series)
}

fn cd_report(reports: &[analysis::CdReport], options: &IndicatorOptions) -> (serde_json::Value, Table, Vec<LineSeries>) {
    let mut table = Table::new(["budget", "algorithm", "average_rank", "critical_difference", "statistic", "p_value"]);
    let algorithms = reports.first().map(|r| r.algorithms.clone()).unwrap_or_default();
    let mut series: Vec<LineSeries> = algorithms
        .iter()
        .map(|a| LineSeries { label: a.clone(), points: Vec::new(), band: false })
        .collect();
    let mut entries = Vec::new();
    for r in reports {
        for (i, a) in r.algorithms.iter().enumerate() {
            let ar = r.result.average_ranks[i];
            table.push(vec![
                r.budget.into(),
                a.as_str().into(),
                ar.into(),
                r.result.critical_difference.into(),
                r.result.statistic.into(),
                r.result.p_value.into(),
            ]);
            series[i].points.push((r.budget as f64, ar, ar, ar));
        }
        entries.push(json!({
            "budget": r.budget,
            "algorithms": r.algorithms,
            "average_ranks": r.result.average_ranks,
            "critical_difference": r.result.critical_difference,
            "statistic": r.result.statistic,
            "p_value": r.result.p_value,
            "blocks": r.blocks.len(),
        }));
    }
    let report = json!({
        "method": "cd",
        "indicator": options.kind.name(),
        "rankings": entries,
    });
    (report, table, series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("moanytime").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&[]).0, 2);
        assert_eq!(run(&["frobnicate"]).0, 2);
        assert_eq!(run(&["trace", "--input", "x", "--format", "png"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn unknown_indicator_exits_3() {
        let (code, _, err) = run(&["trace", "--input", "/nonexistent", "--indicator", "gd"]);
        assert_eq!(code, 3, "{err}");
        assert!(err.contains("--indicator"));
    }

    #[test]
    fn missing_input_is_a_coverage_error() {
        assert_eq!(run(&["trace", "--input", "/nonexistent/dir", "--out", "/tmp/x"]).0, 5);
    }
}
