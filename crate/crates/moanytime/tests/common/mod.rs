#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use moanytime::core::{ObjectiveVector, Solution};
use moanytime::{open_logger, RunMeta, StoreMode};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_moanytime")
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

pub fn meta(alg: &str, problem: &str, run_id: u32, m: usize, budget: u64) -> RunMeta {
    RunMeta {
        suite: "ZDT".into(),
        problem: problem.into(),
        m,
        n: 2,
        algorithm: alg.into(),
        params: BTreeMap::new(),
        run_id,
        seed: 0,
        budget,
        store_mode: StoreMode::All,
        data_file: RunMeta::default_data_file(alg, problem, run_id),
        log_decision: false,
    }
}

/// Logs `points` as evaluations `1..=len`.
pub fn write_run(dir: &Path, alg: &str, problem: &str, run_id: u32, points: &[Vec<f64>]) {
    let m = points.first().map_or(2, Vec::len);
    let mut logger = open_logger(meta(alg, problem, run_id, m, points.len().max(1) as u64), dir).unwrap();
    for (i, p) in points.iter().enumerate() {
        logger
            .log_eval(&Solution::new(i as u64 + 1, ObjectiveVector::new(p.clone()).unwrap()))
            .unwrap();
    }
    logger.finalize().unwrap();
}

/// Parses an SVG and checks the root element and its viewBox.
pub fn check_svg(text: &str) {
    let doc = roxmltree::Document::parse(text).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    let vb = root.attribute("viewBox").expect("viewBox set");
    assert_eq!(vb.split(' ').count(), 4);
}

/// The CSV embedded in an SVG's `<metadata>` element.
pub fn svg_csv(text: &str) -> String {
    let doc = roxmltree::Document::parse(text).unwrap();
    doc.descendants()
        .find(|n| n.has_tag_name("metadata"))
        .and_then(|n| n.text())
        .unwrap_or("")
        .to_string()
}
