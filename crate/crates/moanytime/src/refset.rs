//! Reference-set files: header `raw_y1 ... raw_y<m>`, then one point per
//! line with the same number formatting as the run logs.

use std::fs;
use std::path::Path;

use moanytime_core::{nondominated_filter, ObjectiveVector, ParetoSet};

use crate::format::fmt_f64;
use crate::{Error, Result};

fn header(m: usize) -> String {
    (1..=m).map(|i| format!("raw_y{i}")).collect::<Vec<_>>().join(" ")
}

/// Serializes a reference set.
pub fn to_string(set: &ParetoSet) -> Result<String> {
    let m = set
        .dim()
        .ok_or_else(|| Error::IndicatorInput("reference set is empty".into()))?;
    let mut out = header(m);
    out.push('\n');
    for p in set.points() {
        let line: Vec<String> = p.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_refset(path: &Path, set: &ParetoSet) -> Result<()> {
    let text = to_string(set)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a reference-set file. Dominated and repeated points are dropped.
pub fn read_refset(path: &Path) -> Result<ParetoSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(path, &text)
}

fn parse(path: &Path, text: &str) -> Result<ParetoSet> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let lines: Vec<&str> = text.split('\n').collect();
    let (tail, body) = lines.split_last().expect("split yields at least one item");
    if !tail.is_empty() {
        return Err(err(lines.len(), "truncated line (no terminator)".into()));
    }
    let Some(first) = body.first() else {
        return Err(err(1, "missing header".into()));
    };
    let m = first.split(' ').count();
    if m < 2 || *first != header(m) {
        return Err(err(1, format!("expected header `raw_y1 ... raw_y<m>`, found {first:?}")));
    }
    let mut points = Vec::with_capacity(body.len() - 1);
    for (i, line) in body.iter().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != m {
            return Err(err(i + 1, format!("expected {m} fields, found {}", fields.len())));
        }
        let values = fields
            .iter()
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(i + 1, format!("bad number {s:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(ObjectiveVector::new(values)?);
    }
    if points.is_empty() {
        return Err(Error::IndicatorInput(format!(
            "reference set {} has no points",
            path.display()
        )));
    }
    let mut front = nondominated_filter(&points)?.into_points();
    front.sort_by(|a, b| lex(a, b));
    front.dedup();
    Ok(ParetoSet::from_points(front)?)
}

pub(crate) fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
