//! Experiment configuration and runner.
//!
//! A configuration is a JSON object:
//!
//! ```json
//! {
//!   "problems": ["ZDT1", {"name": "DTLZ2", "m": 3, "n": 12}],
//!   "algorithms": [
//!     {"name": "RandomSearch"},
//!     {"name": "NSGA2", "population_size": 100}
//!   ],
//!   "runs": 25,
//!   "budget": 50000,
//!   "seed": 1,
//!   "output_dir": "results",
//!   "store_mode": "all",
//!   "log_decision": false
//! }
//! ```
//!
//! Only `problems`, `algorithms` and `output_dir` are required. Unknown keys
//! are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use moanytime_core::algorithms::{random_search, Nsga2};
use moanytime_core::problems::ProblemSpec;
use moanytime_core::rng::{rng_from_seed, run_seed};
use moanytime_core::Solution;
use serde::{Deserialize, Serialize};

use crate::logging::{open_logger, RunMeta, StoreMode};
use crate::{Error, Result};

pub const DEFAULT_RUNS: u32 = 25;
pub const DEFAULT_BUDGET: u64 = 50_000;

/// Parameter recorded for runs whose population can be replayed.
pub const SELECTION_PARAM: &str = "selection";
pub const NSGA2_SELECTION: &str = "nsga2_generational";
pub const POPULATION_PARAM: &str = "population_size";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemEntry {
    Name(String),
    Detailed {
        name: String,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        m: Option<usize>,
    },
}

impl ProblemEntry {
    pub fn spec(&self) -> Result<ProblemSpec> {
        let spec = match self {
            ProblemEntry::Name(name) => ProblemSpec::new(name),
            ProblemEntry::Detailed { name, n, m } => ProblemSpec::with_dimensions(name, *n, *m),
        };
        spec.map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgorithmName {
    RandomSearch,
    #[serde(alias = "NSGA-II", alias = "Nsga2")]
    NSGA2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub name: AlgorithmName,
    /// Required for NSGA2.
    #[serde(default)]
    pub population_size: Option<usize>,
    /// Name used in logs; defaults to `RandomSearch` or `NSGA2-mu<size>`.
    #[serde(default)]
    pub label: Option<String>,
}

impl AlgorithmEntry {
    pub fn label(&self) -> String {
        match (&self.label, self.name, self.population_size) {
            (Some(l), _, _) => l.clone(),
            (None, AlgorithmName::RandomSearch, _) => "RandomSearch".into(),
            (None, AlgorithmName::NSGA2, Some(mu)) => format!("NSGA2-mu{mu}"),
            (None, AlgorithmName::NSGA2, None) => "NSGA2".into(),
        }
    }

    fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        if let (AlgorithmName::NSGA2, Some(mu)) = (self.name, self.population_size) {
            p.insert(POPULATION_PARAM.into(), mu.to_string());
            p.insert(SELECTION_PARAM.into(), NSGA2_SELECTION.into());
        }
        p
    }
}

fn default_runs() -> u32 {
    DEFAULT_RUNS
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

fn default_store_mode() -> StoreMode {
    StoreMode::All
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemEntry>,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default = "default_runs")]
    pub runs: u32,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_store_mode")]
    pub store_mode: StoreMode,
    #[serde(default)]
    pub log_decision: bool,
}

impl ExperimentConfig {
    /// Parses and validates a configuration; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                Error::Config(e.into_inner().to_string())
            } else {
                Error::Config(format!("{path}: {}", e.into_inner()))
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::Config("problems: at least one problem is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithms: at least one algorithm is required".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs: must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget: must be at least 1".into()));
        }
        let mut names = BTreeSet::new();
        for (i, p) in self.problems.iter().enumerate() {
            let spec = p.spec().map_err(|e| Error::Config(format!("problems[{i}]: {e}")))?;
            if !names.insert(spec.name()) {
                return Err(Error::Config(format!("problems[{i}]: {} listed twice", spec.name())));
            }
        }
        let mut labels = BTreeSet::new();
        for (i, a) in self.algorithms.iter().enumerate() {
            match (a.name, a.population_size) {
                (AlgorithmName::NSGA2, None) => {
                    return Err(Error::Config(format!(
                        "algorithms[{i}].population_size: required for NSGA2"
                    )))
                }
                (AlgorithmName::NSGA2, Some(mu)) if mu < 2 => {
                    return Err(Error::Config(format!(
                        "algorithms[{i}].population_size: must be at least 2, got {mu}"
                    )))
                }
                (AlgorithmName::NSGA2, Some(mu)) if self.budget < mu as u64 => {
                    return Err(Error::Config(format!(
                        "algorithms[{i}].population_size: budget {} is smaller than {mu}",
                        self.budget
                    )))
                }
                (AlgorithmName::RandomSearch, Some(_)) => {
                    return Err(Error::Config(format!(
                        "algorithms[{i}].population_size: not used by RandomSearch"
                    )))
                }
                _ => {}
            }
            let label = a.label();
            if label.is_empty() || label.contains(['/', '\\', ' ']) {
                return Err(Error::Config(format!(
                    "algorithms[{i}].label: {label:?} is not usable in file names"
                )));
            }
            if !labels.insert(label.clone()) {
                return Err(Error::Config(format!("algorithms[{i}].label: {label} used twice")));
            }
        }
        Ok(())
    }
}

/// What one finished run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub algorithm: String,
    pub problem: String,
    pub run_id: u32,
    pub seed: u64,
    pub evaluations: u64,
    pub records: usize,
    pub data_file: PathBuf,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} run {}: {} evaluations, {} records -> {}",
            self.algorithm,
            self.problem,
            self.run_id,
            self.evaluations,
            self.records,
            self.data_file.display()
        )
    }
}

/// Executes every `(algorithm, problem, run)` cell of `config`, calling
/// `progress` after each run. A failing run leaves no data file behind.
pub fn run_experiment(config: &ExperimentConfig, mut progress: impl FnMut(&RunSummary)) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let dir = &config.output_dir;
    let mut summaries = Vec::new();
    for entry in &config.problems {
        let problem = entry.spec()?;
        for alg in &config.algorithms {
            let label = alg.label();
            for run_id in 0..config.runs {
                let seed = run_seed(config.seed, &label, problem.name(), run_id);
                let meta = RunMeta {
                    suite: problem.suite().into(),
                    problem: problem.name().into(),
                    m: problem.m(),
                    n: problem.n(),
                    algorithm: label.clone(),
                    params: alg.params(),
                    run_id,
                    seed,
                    budget: config.budget,
                    store_mode: config.store_mode,
                    data_file: RunMeta::default_data_file(&label, problem.name(), run_id),
                    log_decision: config.log_decision,
                };
                let summary = execute_run(&problem, alg, meta, dir)?;
                progress(&summary);
                summaries.push(summary);
            }
        }
    }
    Ok(summaries)
}

fn execute_run(problem: &ProblemSpec, alg: &AlgorithmEntry, meta: RunMeta, dir: &Path) -> Result<RunSummary> {
    let rng = rng_from_seed(meta.seed);
    let budget = meta.budget;
    let mut logger = open_logger(meta, dir)?;
    let stream: Box<dyn Iterator<Item = Solution> + '_> = match alg.name {
        AlgorithmName::RandomSearch => Box::new(random_search(problem, budget, rng)?),
        AlgorithmName::NSGA2 => {
            let mu = alg.population_size.expect("validated");
            Box::new(Nsga2::new(problem, mu, budget, rng)?)
        }
    };
    let mut evaluations = 0;
    let outcome = (|| {
        for s in stream {
            evaluations = s.eval_index;
            logger.log_eval(&s)?;
        }
        logger.finalize()
    })();
    if let Err(e) = outcome {
        let _ = logger.abort();
        return Err(e);
    }
    let m = logger.meta();
    Ok(RunSummary {
        algorithm: m.algorithm.clone(),
        problem: m.problem.clone(),
        run_id: m.run_id,
        seed: m.seed,
        evaluations,
        records: logger.written(),
        data_file: logger.data_path().to_path_buf(),
    })
}
