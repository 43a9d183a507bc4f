//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails. Pass criterion numbers as arguments to run a
//! subset.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant, SystemTime};

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use moanytime::analysis::{self, IndicatorOptions, RefsetSource};
use moanytime::core::anytime::{make_budget_grid, trajectory, BudgetGrid, Scale};
use moanytime::core::eaf::{eaf, eaf_diff};
use moanytime::core::hypervolume::{hypervolume, hypervolume_recursive};
use moanytime::core::indicators::{
    hv_fraction, Direction, Indicator, IndicatorKind, NormalizationBounds,
};
use moanytime::core::ranking::{
    critical_difference, friedman, robust_rank, Aggregator, BootstrapConfig, PerformanceTable,
    Resampling,
};
use moanytime::core::{ObjectiveVector, ParetoSet, Solution};
use moanytime::experiment::{run_experiment, ExperimentConfig};
use moanytime::{ingest, open_logger, parse_run, DataSet, StoreMode};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn io<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure!(
        elapsed <= Duration::from_secs(limit_secs),
        "took {:.1}s, limit {limit_secs}s",
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn ov(v: Vec<f64>) -> ObjectiveVector {
    ObjectiveVector::new(v).unwrap()
}

fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn strictly_dominates(a: &[f64], b: &[f64]) -> bool {
    weakly_dominates(a, b) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn experiment(dir: &Path, body: &str) -> Result<DataSet, String> {
    let text = format!(r#"{{ {body}, "output_dir": {:?} }}"#, dir.to_str().unwrap());
    let config = io(ExperimentConfig::from_json(&text))?;
    io(run_experiment(&config, |_| {}))?;
    io(ingest(dir, None))
}

// ---------------------------------------------------------------------------
// 1. hypervolume

fn random_front(rng: &mut SmallRng, m: usize, n: usize) -> Vec<Vec<f64>> {
    let style = rng.random_range(0..3);
    (0..n)
        .map(|_| match style {
            0 => (0..m).map(|_| rng.random::<f64>()).collect(),
            1 => {
                let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let scale = 1.0 - 0.05 * rng.random::<f64>();
                v.iter().map(|x| x / norm * scale).collect()
            }
            _ => (0..m).map(|_| rng.random_range(0..8) as f64 / 8.0).collect(),
        })
        .collect()
}

/// Jittered-stratified Monte-Carlo volume of the region dominated by
/// `points` inside the box `[min(points), reference]`, with `per_axis^m`
/// samples.
fn monte_carlo_volume(points: &[Vec<f64>], reference: &[f64], per_axis: usize, rng: &mut SmallRng) -> f64 {
    let m = reference.len();
    let lo: Vec<f64> = (0..m)
        .map(|d| points.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();
    let step: Vec<f64> = (0..m).map(|d| (reference[d] - lo[d]) / per_axis as f64).collect();
    let mut sorted: Vec<[f64; 3]> = points
        .iter()
        .map(|p| [p[0], p[1], if m == 3 { p[2] } else { f64::NEG_INFINITY }])
        .collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut idx = vec![0usize; m];
    let mut hit: u64 = 0;
    let total = (per_axis as u64).pow(m as u32);
    let mut z = [f64::INFINITY; 3];
    for _ in 0..total {
        for d in 0..m {
            z[d] = lo[d] + (idx[d] as f64 + rng.random::<f64>()) * step[d];
        }
        for p in &sorted {
            if p[0] > z[0] {
                break;
            }
            if p[1] <= z[1] && p[2] <= z[2] {
                hit += 1;
                break;
            }
        }
        for d in 0..m {
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
        }
    }
    let volume: f64 = (0..m).map(|d| reference[d] - lo[d]).product();
    volume * hit as f64 / total as f64
}

/// Exact volume by inclusion-exclusion over every non-empty subset.
fn inclusion_exclusion(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let members: Vec<&Vec<f64>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &points[i]).collect();
        let vol: f64 = (0..reference.len())
            .map(|d| reference[d] - members.iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max))
            .product();
        total += if members.len() % 2 == 1 { vol } else { -vol };
    }
    total
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = SmallRng::seed_from_u64(1);
    let mut worst_rel: f64 = 0.0;
    let mut small = 0;
    for f in 0..50 {
        let m = 2 + f % 2;
        let n = if f < 12 { 1 + f % 5 } else { rng.random_range(1..=50) };
        let points = random_front(&mut rng, m, n);
        let reference = vec![1.1; m];
        let fast = io(hypervolume(&points, &reference))?;
        let recursive = io(hypervolume_recursive(&points, &reference))?;
        ensure!(
            (fast - recursive).abs() <= 1e-12,
            "front {f}: sweep {fast} vs recursion {recursive}"
        );
        if n <= 5 {
            small += 1;
            let exact = inclusion_exclusion(&points, &reference);
            ensure!(
                (fast - exact).abs() <= 1e-12,
                "front {f}: sweep {fast} vs inclusion-exclusion {exact}"
            );
        }
        let per_axis = (1e7f64.powf(1.0 / m as f64)).ceil() as usize;
        let estimate = monte_carlo_volume(&points, &reference, per_axis, &mut rng);
        let rel = (fast - estimate).abs() / fast;
        ensure!(rel <= 1e-3, "front {f} (m={m}, n={n}): {fast} vs Monte-Carlo {estimate}, rel {rel:e}");
        worst_rel = worst_rel.max(rel);
    }
    within(start.elapsed(), 120)?;
    Ok(format!("50 fronts, {small} with n<=5, worst Monte-Carlo rel error {worst_rel:.2e}"))
}

// ---------------------------------------------------------------------------
// 2. monotonicity

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let tmp = io(tempfile::tempdir())?;
    let exp = tmp.path().join("exp");
    let ds = experiment(
        &exp,
        r#""problems": ["ZDT1"], "algorithms": [{"name": "RandomSearch"}], "runs": 25, "budget": 2000, "seed": 2"#,
    )?;
    let front = ParetoSet::from_points(
        (0..=1000)
            .map(|i| {
                let f1 = i as f64 / 1000.0;
                ov(vec![f1, 1.0 - f1.sqrt()])
            })
            .collect(),
    )
    .unwrap();
    let refset = tmp.path().join("zdt1.ref");
    io(moanytime::refset::write_refset(&refset, &front))?;
    // integer rounding merges the smallest log-spaced budgets
    let grid = (50..)
        .map(|count| make_budget_grid(1, 2000, count, Scale::Log).unwrap())
        .find(|g| g.len() >= 50)
        .unwrap();
    let hv = io(analysis::prepare(&ds, "ZDT1", &IndicatorOptions::hypervolume()))?;
    let mut igd_options = IndicatorOptions::new(IndicatorKind::IgdPlus);
    igd_options.refset = RefsetSource {
        per_problem: BTreeMap::from([("ZDT1".to_string(), refset)]),
        ..Default::default()
    };
    let igd = io(analysis::prepare(&ds, "ZDT1", &igd_options))?;
    let mut runs = 0;
    for (_, run) in ds.runs() {
        let records = io(run.records())?;
        let h = io(trajectory(records, &hv.indicator, &grid, &hv.bounds))?.values;
        let g = io(trajectory(records, &igd.indicator, &grid, &igd.bounds))?.values;
        for j in 1..h.len() {
            ensure!(h[j] >= h[j - 1], "run {}: HV drops at budget {}", run.meta().run_id, grid.budgets()[j]);
            ensure!(g[j] <= g[j - 1], "run {}: IGD+ rises at budget {}", run.meta().run_id, grid.budgets()[j]);
        }
        runs += 1;
    }
    ensure!(runs == 25, "expected 25 runs, found {runs}");
    within(start.elapsed(), 60)?;
    Ok(format!("25 runs x {} budgets, HV non-decreasing and IGD+ non-increasing", grid.len()))
}

// ---------------------------------------------------------------------------
// 3. lazy trajectory equals from-scratch recomputation

fn criterion_3() -> Outcome {
    let mut rng = SmallRng::seed_from_u64(3);
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for archive in 0..10 {
        let m = 2 + archive % 2;
        let n = rng.random_range(50..2000);
        let mut index = 0u64;
        let records: Vec<Solution> = (0..n)
            .map(|_| {
                index += rng.random_range(1..5);
                let values = (0..m)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            rng.random_range(0..10) as f64
                        } else {
                            10.0 * rng.random::<f64>()
                        }
                    })
                    .collect();
                Solution::new(index, ov(values))
            })
            .collect();
        let lo: Vec<f64> = (0..m)
            .map(|d| records.iter().map(|s| s.objectives[d]).fold(f64::INFINITY, f64::min) - 0.5)
            .collect();
        let hi: Vec<f64> = (0..m)
            .map(|d| records.iter().map(|s| s.objectives[d]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let bounds = io(NormalizationBounds::new(ov(lo), ov(hi)))?;
        let first = records[0].eval_index;
        let budgets: BTreeSet<u64> = (0..20).map(|_| rng.random_range(first..=index + 10)).collect();
        let grid = io(BudgetGrid::from_budgets(budgets.into_iter().collect()))?;
        let mut reference_set = || {
            ParetoSet::from_points(
                (0..30)
                    .map(|_| ov((0..m).map(|_| 0.1 + 0.9 * rng.random::<f64>()).collect()))
                    .collect(),
            )
            .unwrap()
        };
        let indicators = [
            io(Indicator::normalized_hypervolume(m))?,
            Indicator::IgdPlus { reference_set: reference_set() },
            Indicator::EpsilonAdditive { reference_set: reference_set() },
            Indicator::EpsilonMultiplicative { reference_set: reference_set() },
            io(Indicator::default_r2(m))?,
        ];
        for indicator in &indicators {
            let lazy = io(trajectory(&records, indicator, &grid, &bounds))?;
            for (j, &b) in grid.budgets().iter().enumerate() {
                let prefix: Vec<Vec<f64>> = records
                    .iter()
                    .filter(|s| s.eval_index <= b)
                    .map(|s| bounds.normalize(&s.objectives).unwrap().into_inner())
                    .collect();
                let front: Vec<&Vec<f64>> = prefix
                    .iter()
                    .filter(|p| !prefix.iter().any(|q| strictly_dominates(q, p)))
                    .collect();
                let eager = io(indicator.evaluate(&front))?;
                let diff = (lazy.values[j] - eager).abs();
                ensure!(
                    diff <= 1e-12,
                    "archive {archive}, {}, budget {b}: lazy {} vs eager {eager}",
                    indicator.kind().name(),
                    lazy.values[j]
                );
                worst = worst.max(diff);
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (archive, indicator, budget) checks, worst difference {worst:e}"))
}

// ---------------------------------------------------------------------------
// 4. log round trip

fn adversarial(rng: &mut SmallRng) -> f64 {
    const SPECIAL: [f64; 14] = [
        -0.0,
        0.0,
        5e-324,
        -5e-324,
        1e308,
        -1e308,
        f64::MAX,
        f64::MIN,
        f64::MIN_POSITIVE,
        f64::EPSILON,
        0.1,
        1.0 / 3.0,
        1e-300,
        123_456_789.123_456_79,
    ];
    match rng.random_range(0..4) {
        0 => SPECIAL[rng.random_range(0..SPECIAL.len())],
        1 => loop {
            let v = f64::from_bits(rng.random());
            if v.is_finite() {
                break v;
            }
        },
        2 => rng.random_range(-5..5) as f64,
        _ => rng.random::<f64>() * 10f64.powi(rng.random_range(-20..20)),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = SmallRng::seed_from_u64(4);
    let tmp = io(tempfile::tempdir())?;
    let (first_dir, second_dir) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut total_records = 0;
    for archive in 0..100u32 {
        let m = [2, 3, 5][archive as usize % 3];
        let n = if archive % 10 == 0 { 10_000 } else { rng.random_range(0..3000) };
        let mut meta = common::meta("Alg", &format!("P{archive}"), archive, m, 1);
        if archive % 4 == 3 {
            meta.store_mode = StoreMode::NondominatedOnly;
        }
        let mut index = 0;
        let records: Vec<Solution> = (0..n)
            .map(|_| {
                index += rng.random_range(1..4);
                Solution::new(index, ov((0..m).map(|_| adversarial(&mut rng)).collect()))
            })
            .collect();
        meta.budget = index + rng.random_range(0..3);
        let mut logger = io(open_logger(meta.clone(), &first_dir))?;
        for s in &records {
            io(logger.log_eval(s))?;
        }
        io(logger.finalize())?;
        let parsed = io(parse_run(&meta, &first_dir))?;
        if meta.store_mode == StoreMode::All {
            ensure!(parsed.records.len() == records.len(), "archive {archive}: record count changed");
            for (a, b) in parsed.records.iter().zip(&records) {
                let same = a.eval_index == b.eval_index
                    && a.objectives.iter().zip(b.objectives.iter()).all(|(x, y)| x.to_bits() == y.to_bits());
                ensure!(same, "archive {archive}: record {} changed", b.eval_index);
            }
        }
        let mut relog = io(open_logger(meta.clone(), &second_dir))?;
        for s in &parsed.records {
            ensure!(io(relog.log_eval(s))?, "archive {archive}: parsed record {} rejected", s.eval_index);
        }
        io(relog.finalize())?;
        let file = &meta.data_file;
        let (a, b) = (io(fs::read(first_dir.join(file)))?, io(fs::read(second_dir.join(file)))?);
        ensure!(a == b, "archive {archive}: rewritten file differs");
        total_records += parsed.records.len();
    }
    Ok(format!("100 archives, {total_records} records, byte-identical rewrites"))
}

// ---------------------------------------------------------------------------
// 5. EAF

fn oracle_count(runs: &[Vec<[f64; 2]>], z: [f64; 2]) -> usize {
    runs.iter()
        .filter(|run| run.iter().any(|p| p[0] <= z[0] && p[1] <= z[1]))
        .count()
}

fn criterion_5() -> Outcome {
    let mut rng = SmallRng::seed_from_u64(5);
    let upper = [1.1, 1.1];
    let mut samples = 0;
    for instance in 0..20 {
        let n_runs = 2 + instance % 4;
        let runs: Vec<Vec<[f64; 2]>> = (0..n_runs)
            .map(|_| {
                (0..rng.random_range(1..12))
                    .map(|_| {
                        let mut c = || {
                            if rng.random_bool(0.5) {
                                rng.random_range(0..16) as f64 / 16.0
                            } else {
                                rng.random::<f64>()
                            }
                        };
                        [c(), c()]
                    })
                    .collect()
            })
            .collect();
        let grid = io(eaf(&runs, upper))?;
        let mut locations: Vec<[f64; 2]> = Vec::new();
        for i in 0..200 {
            for j in 0..200 {
                locations.push([(i as f64 + 0.5) / 200.0 * upper[0], (j as f64 + 0.5) / 200.0 * upper[1]]);
            }
        }
        let xs: Vec<f64> = runs.iter().flatten().map(|p| p[0]).collect();
        let ys: Vec<f64> = runs.iter().flatten().map(|p| p[1]).collect();
        for &x in &xs {
            for &y in &ys {
                locations.push([x, y]);
            }
        }
        for &z in &locations {
            let expected = oracle_count(&runs, z) as f64 / n_runs as f64;
            let got = grid.fraction_at(z);
            ensure!(got == expected, "instance {instance} at {z:?}: {got} vs oracle {expected}");
            samples += 1;
        }
        // nesting: attainment counts never drop when moving away from the origin
        for i in 0..200 {
            for j in 0..200 {
                let z = locations[i * 200 + j];
                let c = grid.count_at(z);
                if i + 1 < 200 {
                    ensure!(grid.count_at(locations[(i + 1) * 200 + j]) >= c, "instance {instance}: count drops in x");
                }
                if j + 1 < 200 {
                    ensure!(grid.count_at(locations[i * 200 + j + 1]) >= c, "instance {instance}: count drops in y");
                }
            }
        }
        for k in 1..=n_runs {
            let surface = io(grid.attainment_surface(k))?;
            for p in surface.points() {
                ensure!(
                    oracle_count(&runs, [p[0], p[1]]) >= k,
                    "instance {instance}: surface {k} point {p:?} attained by fewer runs"
                );
            }
            if k < n_runs {
                let next = io(grid.attainment_surface(k + 1))?;
                for q in next.points() {
                    ensure!(
                        surface.points().iter().any(|p| weakly_dominates(p, q)),
                        "instance {instance}: surface {} not nested in surface {k}",
                        k + 1
                    );
                }
            }
        }
        let diff = io(eaf_diff(&runs, &runs, upper))?;
        ensure!(
            diff.cells().iter().all(|c| diff.cell_fraction(c) == 0.0),
            "instance {instance}: eaf_diff(A, A) has a non-zero cell"
        );
        ensure!(
            locations.iter().all(|&z| diff.fraction_at(z) == 0.0),
            "instance {instance}: eaf_diff(A, A) non-zero at a sample"
        );
    }
    Ok(format!("20 instances, {samples} locations match the oracle exactly, nesting and self-difference hold"))
}

// ---------------------------------------------------------------------------
// 6. robust ranking

struct OracleRanking {
    win: Vec<Vec<f64>>,
    mean_rank: Vec<f64>,
    groups: Vec<Vec<usize>>,
}

fn oracle_aggregate(values: &[f64], aggregator: Aggregator) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match aggregator {
        Aggregator::Mean => v.iter().sum::<f64>() / v.len() as f64,
        Aggregator::Median if v.len() % 2 == 1 => v[v.len() / 2],
        Aggregator::Median => (v[v.len() / 2 - 1] + v[v.len() / 2]) / 2.0,
    }
}

/// Enumerates every ordered resample with an odometer and derives the beat
/// relation, its strongly connected components and their order.
fn ranking_oracle(values: &[Vec<f64>], aggregator: Aggregator, alpha: f64) -> OracleRanking {
    let n = values.len();
    let k = values[0].len();
    let mut draw = vec![0usize; k];
    let mut wins = vec![vec![0.0; n]; n];
    let mut rank_sum = vec![0.0; n];
    let mut count = 0.0;
    loop {
        let agg: Vec<f64> = values
            .iter()
            .map(|row| oracle_aggregate(&draw.iter().map(|&i| row[i]).collect::<Vec<_>>(), aggregator))
            .collect();
        for a in 0..n {
            let (mut less, mut equal) = (0.0, 0.0);
            for b in 0..n {
                if agg[a] < agg[b] {
                    wins[a][b] += 1.0;
                } else if agg[a] == agg[b] {
                    wins[a][b] += 0.5;
                    if a != b {
                        equal += 1.0;
                    }
                }
                if agg[b] < agg[a] {
                    less += 1.0;
                }
            }
            rank_sum[a] += 1.0 + less + equal / 2.0;
        }
        count += 1.0;
        let mut d = 0;
        while d < k {
            draw[d] += 1;
            if draw[d] < k {
                break;
            }
            draw[d] = 0;
            d += 1;
        }
        if d == k {
            break;
        }
    }
    let win: Vec<Vec<f64>> = wins.iter().map(|r| r.iter().map(|w| w / count).collect()).collect();
    let mean_rank: Vec<f64> = rank_sum.iter().map(|s| s / count).collect();
    let beats = |a: usize, b: usize| win[a][b] >= 1.0 - alpha && win[a][b] > 0.5;
    let reach_from = |start: usize| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(a) = queue.pop_front() {
            for b in 0..n {
                if !seen[b] && !beats(b, a) {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        seen
    };
    let reach: Vec<Vec<bool>> = (0..n).map(reach_from).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if groups.iter().any(|g| g.contains(&a)) {
            continue;
        }
        let mut g: Vec<usize> = (0..n).filter(|&b| reach[a][b] && reach[b][a]).collect();
        g.sort_by(|&x, &y| mean_rank[x].total_cmp(&mean_rank[y]).then(x.cmp(&y)));
        groups.push(g);
    }
    let reachable = |g: &Vec<usize>| reach[g[0]].iter().filter(|&&r| r).count();
    groups.sort_by(|g, h| {
        reachable(h)
            .cmp(&reachable(g))
            .then(mean_rank[g[0]].total_cmp(&mean_rank[h[0]]))
    });
    OracleRanking { win, mean_rank, groups }
}

fn rank_cli(dir: &Path) -> Result<Vec<u8>, String> {
    let out = common::cli(&["rank", "--input", dir.to_str().unwrap(), "--samples", "2000", "--seed", "11", "--budgets", "5,20"]);
    ensure!(out.status.success(), "rank failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn criterion_6() -> Outcome {
    let mut rng = SmallRng::seed_from_u64(6);
    let mut tables = 0;
    for t in 0..200usize {
        let k = 1 + t % 4;
        let n = 2 + t % 2;
        let spread = rng.random_range(1..6);
        let values: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                (0..k)
                    .map(|_| (rng.random_range(0..spread) + if t % 3 == 0 { 2 * a } else { 0 }) as f64 / 4.0)
                    .collect()
            })
            .collect();
        let aggregator = if t % 5 == 4 { Aggregator::Median } else { Aggregator::Mean };
        let table = io(PerformanceTable::new(
            (0..n).map(|a| format!("A{a}")).collect(),
            (0..k).map(|i| format!("I{i}")).collect(),
            values.clone(),
            Direction::Minimize,
        ))?;
        let config = BootstrapConfig {
            n_samples: k.pow(k as u32),
            alpha: 0.05,
            seed: t as u64,
            aggregator,
            resampling: Resampling::Exhaustive,
        };
        let got = io(robust_rank(&table, &config))?;
        let oracle = ranking_oracle(&values, aggregator, config.alpha);
        ensure!(got.win_fraction == oracle.win, "table {t}: win fractions {:?} vs oracle {:?}", got.win_fraction, oracle.win);
        for (a, b) in got.mean_rank.iter().zip(&oracle.mean_rank) {
            ensure!((a - b).abs() <= 1e-12, "table {t}: mean ranks {:?} vs {:?}", got.mean_rank, oracle.mean_rank);
        }
        let expected: Vec<Vec<String>> = oracle
            .groups
            .iter()
            .map(|g| g.iter().map(|&a| format!("A{a}")).collect())
            .collect();
        ensure!(got.groups == expected, "table {t}: groups {:?} vs oracle {expected:?}", got.groups);
        tables += 1;
    }

    let tmp = io(tempfile::tempdir())?;
    let dir = tmp.path().join("exp");
    for alg in ["A", "B", "C"] {
        for problem in ["P", "Q", "R"] {
            for run in 0..3 {
                let points: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random(), rng.random()]).collect();
                common::write_run(&dir, alg, problem, run, &points);
            }
        }
    }
    let (first, second) = (rank_cli(&dir)?, rank_cli(&dir)?);
    ensure!(!first.is_empty() && first == second, "two processes with equal seeds disagree");
    Ok(format!("{tables} tables match the enumeration oracle; two processes gave identical {} byte reports", first.len()))
}

// ---------------------------------------------------------------------------
// 7. desk-scale baseline comparison

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let tmp = io(tempfile::tempdir())?;
    let ds = experiment(
        &tmp.path().join("exp"),
        r#""problems": ["ZDT1", "ZDT2", "ZDT3"],
           "algorithms": [{"name": "NSGA2", "population_size": 100}, {"name": "RandomSearch"}],
           "runs": 10, "budget": 10000, "seed": 7"#,
    )?;
    let mut summary = Vec::new();
    for problem in ds.problems() {
        let bounds = io(analysis::problem_bounds(&ds, &problem, true))?;
        let mut means = BTreeMap::new();
        for algorithm in ds.algorithms() {
            let mut fractions = Vec::new();
            for run in ds.runs_for(&algorithm, &problem) {
                let points: Vec<&ObjectiveVector> = io(run.records())?.iter().map(|s| &s.objectives).collect();
                fractions.push(io(hv_fraction(&points, &bounds))?);
            }
            ensure!(fractions.len() == 10, "{algorithm} on {problem}: {} runs", fractions.len());
            means.insert(algorithm, fractions.iter().sum::<f64>() / 10.0);
        }
        let (nsga, rs) = (means["NSGA2-mu100"], means["RandomSearch"]);
        ensure!(nsga > rs, "{problem}: NSGA-II {nsga} does not exceed random search {rs}");
        summary.push(format!("{problem} {nsga:.4}>{rs:.4}"));
    }
    let grid = io(BudgetGrid::from_budgets(vec![10_000]))?;
    let reports = io(analysis::rank_over_time(
        &ds,
        &IndicatorOptions::hypervolume(),
        &grid,
        &BootstrapConfig::default(),
        analysis::DEFAULT_CONFIDENCE,
    ))?;
    let groups = &reports[0].ranking.groups;
    ensure!(
        groups.len() >= 2 && groups.last().unwrap() == &vec!["RandomSearch".to_string()],
        "random search is not alone in the last group: {groups:?}"
    );
    within(start.elapsed(), 600)?;
    Ok(format!("mean final hv_fraction {}; groups {groups:?}", summary.join(", ")))
}

// ---------------------------------------------------------------------------
// 8. indicator swap without re-running

fn snapshot(dir: &Path) -> Result<BTreeMap<PathBuf, (SystemTime, u64)>, String> {
    let mut out = BTreeMap::new();
    for entry in walkdir::WalkDir::new(dir) {
        let entry = io(entry)?;
        let meta = io(entry.metadata())?;
        out.insert(entry.path().to_path_buf(), (io(meta.modified())?, meta.len()));
    }
    Ok(out)
}

fn criterion_8() -> Outcome {
    let tmp = io(tempfile::tempdir())?;
    let exp = tmp.path().join("exp");
    experiment(
        &exp,
        r#""problems": ["ZDT1", "ZDT2"], "algorithms": [{"name": "NSGA2", "population_size": 20}, {"name": "RandomSearch"}],
           "runs": 3, "budget": 500, "seed": 8"#,
    )?;
    let before = snapshot(&exp)?;
    std::thread::sleep(Duration::from_millis(20));
    let out = tmp.path().join("out");
    let refset = tmp.path().join("front.ref");
    let input = exp.to_str().unwrap();
    let made = common::cli(&["refset", "--input", input, "--problem", "ZDT1", "--out", refset.to_str().unwrap()]);
    ensure!(made.status.success(), "refset failed: {}", String::from_utf8_lossy(&made.stderr));
    let refset_arg = format!("ZDT1={}", refset.display());
    for extra in [&["--indicator", "hv"][..], &["--indicator", "igdplus", "--refset", &refset_arg, "--refset", "auto"][..]] {
        let mut args = vec!["trace", "--input", input, "--out", out.to_str().unwrap()];
        args.extend(extra);
        let r = common::cli(&args);
        ensure!(r.status.success(), "trace {extra:?} failed: {}", String::from_utf8_lossy(&r.stderr));
    }
    let after = snapshot(&exp)?;
    ensure!(before == after, "the experiment directory changed");
    for ind in ["hv", "igdplus"] {
        for alg in ["NSGA2-mu20", "RandomSearch"] {
            for problem in ["ZDT1", "ZDT2"] {
                let f = out.join(format!("{ind}_{alg}_{problem}.csv"));
                ensure!(f.is_file(), "missing {}", f.display());
            }
        }
    }
    Ok(format!("HV and IGD+ traces written, {} entries unchanged", before.len()))
}

// ---------------------------------------------------------------------------
// 9. Friedman / critical difference

fn criterion_9() -> Outcome {
    let cd = io(critical_difference(0.05, 3, 20))?;
    let expected = 2.343 * (12.0f64 / 120.0).sqrt();
    ensure!((cd - 0.7410).abs() <= 1e-4, "CD {cd} vs 0.7410");
    ensure!((cd - expected).abs() <= 1e-4, "CD {cd} vs {expected}");
    let tied = vec![vec![0.5; 3]; 20];
    let r = io(friedman(&tied, Direction::Minimize, 0.05))?;
    ensure!(r.p_value >= 0.05, "tied table is significant: p={}", r.p_value);
    ensure!(r.average_ranks == vec![2.0; 3], "tied ranks {:?}", r.average_ranks);
    Ok(format!("CD {cd:.5}; tied table p={} ranks {:?}", r.p_value, r.average_ranks))
}

// ---------------------------------------------------------------------------
// 10. ECDF

fn criterion_10() -> Outcome {
    let tmp = io(tempfile::tempdir())?;
    let ds = experiment(
        &tmp.path().join("exp"),
        r#""problems": ["ZDT1", "ZDT2", "ZDT3", {"name": "DTLZ2", "m": 3}],
           "algorithms": [{"name": "NSGA2", "population_size": 20}, {"name": "RandomSearch"}],
           "runs": 4, "budget": 1000, "seed": 10"#,
    )?;
    let grid = io(make_budget_grid(1, 1000, 40, Scale::Log))?;
    let curves = io(analysis::ecdf(&ds, &grid, true))?;
    ensure!(curves.len() == 2, "expected 2 curves, got {}", curves.len());
    let mut bounds = BTreeMap::new();
    for problem in ds.problems() {
        let mut points = Vec::new();
        for run in ds.runs_of_problem(&problem) {
            points.extend(io(run.records())?.iter().map(|s| s.objectives.clone()));
        }
        bounds.insert(problem, io(NormalizationBounds::from_points(&points))?);
    }
    let mut finals = Vec::new();
    for curve in &curves {
        for (j, &v) in curve.values.iter().enumerate() {
            ensure!((0.0..=1.0).contains(&v), "{}: value {v} outside [0, 1]", curve.algorithm);
            if j > 0 {
                ensure!(v >= curve.values[j - 1], "{}: decreases at budget {}", curve.algorithm, curve.budgets[j]);
            }
        }
        let mut fractions = Vec::new();
        for problem in ds.problems() {
            for run in ds.runs_for(&curve.algorithm, &problem) {
                let points: Vec<&ObjectiveVector> = io(run.records())?.iter().map(|s| &s.objectives).collect();
                fractions.push(io(hv_fraction(&points, &bounds[&problem]))?);
            }
        }
        let expected = fractions.iter().sum::<f64>() / fractions.len() as f64;
        let last = *curve.values.last().unwrap();
        ensure!(
            (last - expected).abs() <= 1e-12,
            "{}: final ECDF {last} vs mean hv_fraction {expected}",
            curve.algorithm
        );
        finals.push(format!("{} {last:.4}", curve.algorithm));
    }
    Ok(format!("bounded, non-decreasing, final values {}", finals.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "hypervolume correctness", criterion_1),
        (2, "anytime monotonicity", criterion_2),
        (3, "lazy equals eager", criterion_3),
        (4, "log round trip", criterion_4),
        (5, "EAF exactness", criterion_5),
        (6, "robust ranking oracle", criterion_6),
        (7, "desk-scale baseline", criterion_7),
        (8, "indicator swap", criterion_8),
        (9, "Friedman and critical difference", criterion_9),
        (10, "ECDF bounds", criterion_10),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}, {secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}, {secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
