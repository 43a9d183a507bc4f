//! Unbounded-archive logging.
//!
//! An experiment directory holds one `experiment_meta.json`, a JSON array of
//! [`RunMeta`] objects, and one text data file per run named
//! `<algorithm>_<problem>_r<run_id>.dat`. A data file starts with the header
//! `evaluations raw_y1 ... raw_y<m>` (followed by `x1 ... x<n>` when decision
//! logging is on) and holds one space-separated record per line: the
//! evaluation index, then the objectives in shortest round-trip decimal
//! form. Lines end in `\n` and carry no trailing whitespace.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use moanytime_core::objective::dominates;
use moanytime_core::problems::ProblemSpec;
use moanytime_core::{Decision, ObjectiveVector, Solution};
use serde::{Deserialize, Serialize};

use crate::format::fmt_f64;
use crate::{Error, Result};

pub const META_FILE: &str = "experiment_meta.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoreMode {
    All,
    NondominatedOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub suite: String,
    pub problem: String,
    pub m: usize,
    pub n: usize,
    pub algorithm: String,
    pub params: BTreeMap<String, String>,
    pub run_id: u32,
    pub seed: u64,
    pub budget: u64,
    pub store_mode: StoreMode,
    pub data_file: String,
    /// Decision columns `x1..xn` follow the objectives.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub log_decision: bool,
}

impl RunMeta {
    /// Canonical data-file name for this run.
    pub fn default_data_file(algorithm: &str, problem: &str, run_id: u32) -> String {
        format!("{algorithm}_{problem}_r{run_id}.dat")
    }

    fn header(&self) -> String {
        let mut h = String::from("evaluations");
        for i in 1..=self.m {
            h.push_str(&format!(" raw_y{i}"));
        }
        if self.log_decision {
            for i in 1..=self.decision_width() {
                h.push_str(&format!(" x{i}"));
            }
        }
        h
    }

    fn is_bitstring(&self) -> bool {
        self.suite == "ZDT" && self.problem.eq_ignore_ascii_case("ZDT5")
    }

    /// Number of decision columns: `n`, or the total bit count for
    /// bit-string problems.
    pub fn decision_width(&self) -> usize {
        if self.is_bitstring() {
            if let Ok(p) = ProblemSpec::with_dimensions("ZDT5", Some(self.n), Some(self.m)) {
                return p.encoded_len();
            }
        }
        self.n
    }

    fn same_run(&self, other: &RunMeta) -> bool {
        self.problem == other.problem
            && self.algorithm == other.algorithm
            && self.run_id == other.run_id
    }
}

/// A logged run: its metadata and records in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArchive {
    pub meta: RunMeta,
    pub records: Vec<Solution>,
}

static META_LOCK: Mutex<()> = Mutex::new(());

/// Reads the metadata array of an experiment directory; a missing file is an
/// empty experiment.
pub fn read_meta(dir: &Path) -> Result<Vec<RunMeta>> {
    let path = dir.join(META_FILE);
    match fs::read(&path) {
        Ok(bytes) => {
            let de = &mut serde_json::Deserializer::from_slice(&bytes);
            serde_path_to_error::deserialize(de).map_err(|e| Error::Metadata {
                path,
                message: e.to_string(),
            })
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn sort_key(m: &RunMeta) -> (&str, &str, &str, &BTreeMap<String, String>, u32) {
    (&m.suite, &m.problem, &m.algorithm, &m.params, m.run_id)
}

fn write_meta(dir: &Path, metas: &mut [RunMeta]) -> Result<()> {
    metas.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    let path = dir.join(META_FILE);
    let tmp = dir.join(format!("{META_FILE}.tmp"));
    let mut text = serde_json::to_string_pretty(&metas).expect("metadata serializes");
    text.push('\n');
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
}

fn with_meta_lock<T>(f: impl FnOnce() -> Result<T>) -> Result<T> {
    let _guard = META_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    f()
}

/// Writer for one run. Created by [`open_logger`].
#[derive(Debug)]
pub struct RunLogger {
    meta: RunMeta,
    dir: PathBuf,
    path: PathBuf,
    writer: Option<BufWriter<File>>,
    last_index: u64,
    front: Vec<ObjectiveVector>,
    written: usize,
    failed: bool,
}

/// Creates the run's data file with its header. Fails if the directory
/// already holds this `(problem, algorithm, run_id)`.
pub fn open_logger(meta: RunMeta, dir: &Path) -> Result<RunLogger> {
    if meta.m < 2 {
        return Err(Error::Logger(format!("runs need at least 2 objectives, got {}", meta.m)));
    }
    if meta.data_file.is_empty() || Path::new(&meta.data_file).components().count() != 1 {
        return Err(Error::Logger(format!(
            "data_file must be a plain file name, got {:?}",
            meta.data_file
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let duplicate = |m: &RunMeta| {
        Error::DuplicateRun(format!(
            "{} on {} run {} already exists in {}",
            m.algorithm,
            m.problem,
            m.run_id,
            dir.display()
        ))
    };
    with_meta_lock(|| {
        if read_meta(dir)?.iter().any(|m| m.same_run(&meta)) {
            return Err(duplicate(&meta));
        }
        Ok(())
    })?;
    let path = dir.join(&meta.data_file);
    let file = OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(&path)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::AlreadyExists => duplicate(&meta),
            _ => Error::io(&path, e),
        })?;
    let mut writer = BufWriter::new(file);
    writeln!(writer, "{}", meta.header()).map_err(|e| Error::io(&path, e))?;
    Ok(RunLogger {
        meta,
        dir: dir.to_path_buf(),
        path,
        writer: Some(writer),
        last_index: 0,
        front: Vec::new(),
        written: 0,
        failed: false,
    })
}

impl RunLogger {
    pub fn meta(&self) -> &RunMeta {
        &self.meta
    }

    pub fn data_path(&self) -> &Path {
        &self.path
    }

    /// Number of records written so far.
    pub fn written(&self) -> usize {
        self.written
    }

    /// Logs one evaluation; returns whether a line was written (always in
    /// `all` mode, only for points no earlier logged point dominates in
    /// `nondominated_only` mode).
    pub fn log_eval(&mut self, s: &Solution) -> Result<bool> {
        if self.failed {
            return Err(Error::Logger("logger is unusable after an earlier failure".into()));
        }
        let Some(writer) = self.writer.as_mut() else {
            return Err(Error::Logger("logger already finalized".into()));
        };
        if s.eval_index <= self.last_index {
            return Err(Error::Logger(format!(
                "evaluation index {} does not increase past {}",
                s.eval_index, self.last_index
            )));
        }
        if s.eval_index > self.meta.budget {
            return Err(Error::Logger(format!(
                "evaluation index {} exceeds the budget {}",
                s.eval_index, self.meta.budget
            )));
        }
        if s.objectives.dim() != self.meta.m {
            return Err(Error::Dimension(format!(
                "run declares {} objectives, got {}",
                self.meta.m,
                s.objectives.dim()
            )));
        }
        if self.meta.store_mode == StoreMode::NondominatedOnly {
            if self
                .front
                .iter()
                .any(|q| dominates(q, &s.objectives).unwrap_or(false))
            {
                self.last_index = s.eval_index;
                return Ok(false);
            }
            self.front.retain(|q| {
                !(q.iter().zip(s.objectives.iter()).all(|(a, b)| b <= a))
            });
            self.front.push(s.objectives.clone());
        }
        let mut line = s.eval_index.to_string();
        for &v in s.objectives.iter() {
            line.push(' ');
            line.push_str(&fmt_f64(v));
        }
        if self.meta.log_decision {
            let width = self.meta.decision_width();
            match &s.decision {
                Some(Decision::Real(x)) if x.len() == width => {
                    for &v in x {
                        line.push(' ');
                        line.push_str(&fmt_f64(v));
                    }
                }
                Some(Decision::Bits(b)) if b.len() == width => {
                    for &bit in b {
                        line.push_str(if bit { " 1" } else { " 0" });
                    }
                }
                _ => {
                    return Err(Error::Logger(format!(
                        "decision logging needs {width} decision values at evaluation {}",
                        s.eval_index
                    )))
                }
            }
        }
        line.push('\n');
        if let Err(e) = writer.write_all(line.as_bytes()) {
            self.failed = true;
            return Err(Error::io(&self.path, e));
        }
        self.last_index = s.eval_index;
        self.written += 1;
        Ok(true)
    }

    /// Flushes and closes the data file and records the run in the
    /// directory's metadata. Calling it again does nothing.
    pub fn finalize(&mut self) -> Result<()> {
        let Some(mut writer) = self.writer.take() else {
            return Ok(());
        };
        writer.flush().map_err(|e| Error::io(&self.path, e))?;
        writer
            .into_inner()
            .map_err(|e| Error::io(&self.path, e.into_error()))?
            .sync_all()
            .map_err(|e| Error::io(&self.path, e))?;
        with_meta_lock(|| {
            let mut metas = read_meta(&self.dir)?;
            metas.retain(|m| !m.same_run(&self.meta));
            metas.push(self.meta.clone());
            write_meta(&self.dir, &mut metas)
        })
    }

    /// Deletes the data file of an unfinished run.
    pub fn abort(mut self) -> Result<()> {
        self.writer.take();
        fs::remove_file(&self.path).map_err(|e| Error::io(&self.path, e))
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads the records of one run described by `meta` in `dir`, validating
/// the header, every line, index monotonicity, the budget and, for
/// `nondominated_only` runs, that no record is dominated by an earlier one.
pub fn parse_run(meta: &RunMeta, dir: &Path) -> Result<RunArchive> {
    let path = dir.join(&meta.data_file);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let records = parse_records(meta, &path, &text)?;
    Ok(RunArchive {
        meta: meta.clone(),
        records,
    })
}

/// Every run of an experiment directory, in metadata order.
pub fn parse_experiment(dir: &Path) -> Result<Vec<RunArchive>> {
    read_meta(dir)?.iter().map(|m| parse_run(m, dir)).collect()
}

fn parse_records(meta: &RunMeta, path: &Path, text: &str) -> Result<Vec<Solution>> {
    if text.is_empty() {
        return Err(parse_err(path, 1, "missing header"));
    }
    let lines: Vec<&str> = text.split('\n').collect();
    // split leaves an empty tail after the final terminator
    let (tail, body) = lines.split_last().expect("split yields at least one item");
    if !tail.is_empty() {
        return Err(parse_err(path, lines.len(), "truncated line (no terminator)"));
    }
    let expected_header = meta.header();
    if body[0] != expected_header {
        return Err(parse_err(
            path,
            1,
            format!("expected header {expected_header:?}, found {:?}", body[0]),
        ));
    }
    let width = 1 + meta.m + if meta.log_decision { meta.decision_width() } else { 0 };
    let mut records: Vec<Solution> = Vec::with_capacity(body.len() - 1);
    let mut front: Vec<ObjectiveVector> = Vec::new();
    for (i, line) in body.iter().enumerate().skip(1) {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != width {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let eval_index: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad evaluation index {:?}", fields[0])))?;
        if eval_index == 0 {
            return Err(parse_err(path, lineno, "evaluation indices start at 1"));
        }
        if let Some(prev) = records.last() {
            if eval_index <= prev.eval_index {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("evaluation index {eval_index} does not increase past {}", prev.eval_index),
                ));
            }
        }
        if eval_index > meta.budget {
            return Err(parse_err(
                path,
                lineno,
                format!("evaluation index {eval_index} exceeds the budget {}", meta.budget),
            ));
        }
        let parse_value = |s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(path, lineno, format!("bad number {s:?}"))),
            }
        };
        let objectives: Vec<f64> = fields[1..=meta.m]
            .iter()
            .map(|s| parse_value(s))
            .collect::<Result<_>>()?;
        let objectives = ObjectiveVector::new(objectives)?;
        let mut solution = Solution::new(eval_index, objectives);
        if meta.log_decision {
            let raw = &fields[1 + meta.m..];
            let decision = if meta.is_bitstring() {
                Decision::Bits(
                    raw.iter()
                        .map(|s| match *s {
                            "0" => Ok(false),
                            "1" => Ok(true),
                            _ => Err(parse_err(path, lineno, format!("bad bit {s:?}"))),
                        })
                        .collect::<Result<_>>()?,
                )
            } else {
                Decision::Real(raw.iter().map(|s| parse_value(s)).collect::<Result<_>>()?)
            };
            solution = solution.with_decision(decision);
        }
        if meta.store_mode == StoreMode::NondominatedOnly {
            if front
                .iter()
                .any(|q| dominates(q, &solution.objectives).unwrap_or(false))
            {
                return Err(parse_err(
                    path,
                    lineno,
                    "record is dominated by an earlier one in a nondominated_only run",
                ));
            }
            front.retain(|q| !(q.iter().zip(solution.objectives.iter()).all(|(a, b)| b <= a)));
            front.push(solution.objectives.clone());
        }
        records.push(solution);
    }
    Ok(records)
}
