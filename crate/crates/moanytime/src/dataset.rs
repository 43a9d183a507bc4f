//! Ingestion of experiment directories into an immutable, lazily loaded
//! [`DataSet`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use moanytime_core::indicators::NormalizationBounds;
use moanytime_core::{nondominated_filter, ObjectiveVector, ParetoSet, Solution};
use walkdir::WalkDir;

use crate::logging::{self, RunMeta, META_FILE};
use crate::refset::lex;
use crate::{Error, Result};

/// Identity of a run within a data set. Ordering is lexicographic over the
/// fields in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub suite: String,
    pub problem: String,
    pub algorithm: String,
    pub params: BTreeMap<String, String>,
    pub run_id: u32,
}

impl RunKey {
    pub fn of(meta: &RunMeta) -> Self {
        RunKey {
            suite: meta.suite.clone(),
            problem: meta.problem.clone(),
            algorithm: meta.algorithm.clone(),
            params: meta.params.clone(),
            run_id: meta.run_id,
        }
    }
}

/// One ingested run; records are parsed on first access.
#[derive(Debug)]
pub struct RunEntry {
    meta: RunMeta,
    dir: PathBuf,
    records: OnceLock<Vec<Solution>>,
}

impl RunEntry {
    pub fn meta(&self) -> &RunMeta {
        &self.meta
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn is_loaded(&self) -> bool {
        self.records.get().is_some()
    }

    /// Records in evaluation order, parsed and validated once.
    pub fn records(&self) -> Result<&[Solution]> {
        if let Some(r) = self.records.get() {
            return Ok(r);
        }
        let archive = logging::parse_run(&self.meta, &self.dir)?;
        Ok(self.records.get_or_init(|| archive.records))
    }
}

/// Runs of one or more experiment directories, indexed by [`RunKey`].
#[derive(Debug)]
pub struct DataSet {
    runs: BTreeMap<RunKey, RunEntry>,
}

/// Loads every run under `dir` (recursively, one `experiment_meta.json` per
/// experiment directory) accepted by `filter`. Only metadata is read here.
pub fn ingest(dir: &Path, filter: Option<&dyn Fn(&RunMeta) -> bool>) -> Result<DataSet> {
    if !dir.is_dir() {
        return Err(Error::Coverage(format!("{} is not a directory", dir.display())));
    }
    let mut meta_dirs = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        if entry.file_type().is_file() && entry.file_name() == META_FILE {
            meta_dirs.push(entry.path().parent().expect("file has a parent").to_path_buf());
        }
    }
    let mut runs = BTreeMap::new();
    let mut dims: BTreeMap<(String, String), usize> = BTreeMap::new();
    for d in meta_dirs {
        for meta in logging::read_meta(&d)? {
            if filter.is_some_and(|f| !f(&meta)) {
                continue;
            }
            let m = *dims
                .entry((meta.suite.clone(), meta.problem.clone()))
                .or_insert(meta.m);
            if m != meta.m {
                return Err(Error::Dimension(format!(
                    "problem {} has runs with {m} and {} objectives",
                    meta.problem, meta.m
                )));
            }
            let key = RunKey::of(&meta);
            if runs.contains_key(&key) {
                return Err(Error::DuplicateRun(format!(
                    "{} on {} run {} appears more than once under {}",
                    meta.algorithm,
                    meta.problem,
                    meta.run_id,
                    dir.display()
                )));
            }
            runs.insert(
                key,
                RunEntry {
                    meta,
                    dir: d.clone(),
                    records: OnceLock::new(),
                },
            );
        }
    }
    if runs.is_empty() {
        return Err(Error::Coverage(format!(
            "no runs selected under {}",
            dir.display()
        )));
    }
    Ok(DataSet { runs })
}

impl DataSet {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Runs in key order.
    pub fn runs(&self) -> impl Iterator<Item = (&RunKey, &RunEntry)> {
        self.runs.iter()
    }

    pub fn get(&self, key: &RunKey) -> Option<&RunEntry> {
        self.runs.get(key)
    }

    /// Distinct problem names, sorted.
    pub fn problems(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.runs.keys().map(|k| k.problem.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Distinct algorithm names, sorted.
    pub fn algorithms(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.runs.keys().map(|k| k.algorithm.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Objective count of a problem.
    pub fn dim(&self, problem: &str) -> Result<usize> {
        self.runs_of_problem(problem)
            .next()
            .map(|r| r.meta.m)
            .ok_or_else(|| absent(problem))
    }

    pub fn runs_of_problem<'a>(&'a self, problem: &'a str) -> impl Iterator<Item = &'a RunEntry> + 'a {
        self.runs.values().filter(move |r| r.meta.problem == problem)
    }

    /// Runs of one `(algorithm, problem)` cell in key order.
    pub fn runs_for<'a>(&'a self, algorithm: &'a str, problem: &'a str) -> impl Iterator<Item = &'a RunEntry> + 'a {
        self.runs
            .values()
            .filter(move |r| r.meta.algorithm == algorithm && r.meta.problem == problem)
    }

    /// Componentwise minimum and maximum over every logged point of
    /// `problem`, across all runs and algorithms.
    pub fn compute_bounds(&self, problem: &str) -> Result<NormalizationBounds> {
        let mut ideal: Option<Vec<f64>> = None;
        let mut worst: Vec<f64> = Vec::new();
        for run in self.runs_of_problem(problem) {
            for s in run.records()? {
                match ideal.as_mut() {
                    None => {
                        ideal = Some(s.objectives.to_vec());
                        worst = s.objectives.to_vec();
                    }
                    Some(lo) => {
                        for (k, &v) in s.objectives.iter().enumerate() {
                            lo[k] = lo[k].min(v);
                            worst[k] = worst[k].max(v);
                        }
                    }
                }
            }
        }
        let Some(ideal) = ideal else {
            return Err(if self.runs_of_problem(problem).next().is_none() {
                absent(problem)
            } else {
                Error::Coverage(format!("problem {problem} has no logged points"))
            });
        };
        Ok(NormalizationBounds::new(
            ObjectiveVector::new(ideal)?,
            ObjectiveVector::new(worst)?,
        )?)
    }

    /// Non-dominated filter of all points of `problem`, thinned to at most
    /// `max_size` points taken at evenly spaced ranks of the lexicographic
    /// order. Repeated points are kept once.
    pub fn extract_reference_set(&self, problem: &str, max_size: usize) -> Result<ParetoSet> {
        if max_size == 0 {
            return Err(Error::Config("reference-set size must be positive".into()));
        }
        let mut points = Vec::new();
        let mut any = false;
        for run in self.runs_of_problem(problem) {
            any = true;
            points.extend(run.records()?.iter().map(|s| s.objectives.clone()));
        }
        if !any {
            return Err(absent(problem));
        }
        if points.is_empty() {
            return Err(Error::Coverage(format!("problem {problem} has no logged points")));
        }
        let mut front = nondominated_filter(&points)?.into_points();
        front.sort_by(|a, b| lex(a, b));
        front.dedup();
        Ok(ParetoSet::from_points(thin(front, max_size))?)
    }
}

fn absent(problem: &str) -> Error {
    Error::Coverage(format!("problem {problem} is not in the data set"))
}

/// Keeps `max` items at ranks `round(i (L-1) / (max-1))`.
fn thin<T>(items: Vec<T>, max: usize) -> Vec<T> {
    let len = items.len();
    if len <= max {
        return items;
    }
    if max == 1 {
        return items.into_iter().take(1).collect();
    }
    let picks: BTreeSet<usize> = (0..max)
        .map(|i| ((i * (len - 1)) as f64 / (max - 1) as f64).round() as usize)
        .collect();
    debug_assert_eq!(picks.len(), max);
    items
        .into_iter()
        .enumerate()
        .filter_map(|(i, p)| picks.contains(&i).then_some(p))
        .collect()
}
