//! Exact two-objective empirical attainment functions.
//!
//! A run attains a location `z` when one of its points weakly dominates `z`.
//! The attainment count of `z` over a list of runs is piecewise constant on
//! axis-aligned rectangles whose edges are the coordinates of the runs'
//! points; this module computes that decomposition exactly with a sweep over
//! x, clipped to an explicit upper corner. Rectangles are half-open,
//! `[x_lo, x_hi) × [y_lo, y_hi)`, and the never-attained region is not
//! represented. Three or more objectives are rejected.

use alloc::vec::Vec;

use crate::objective::lex_cmp;
use crate::{nondominated_filter, Error, ObjectiveVector, ParetoSet, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EafCell {
    pub x_lo: f64,
    pub y_lo: f64,
    pub x_hi: f64,
    pub y_hi: f64,
    pub count: usize,
}

impl EafCell {
    fn contains(&self, z: [f64; 2]) -> bool {
        self.x_lo <= z[0] && z[0] < self.x_hi && self.y_lo <= z[1] && z[1] < self.y_hi
    }
}

/// Attainment counts of `n_runs` runs over the box below `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct EafGrid {
    n_runs: usize,
    upper: [f64; 2],
    cells: Vec<EafCell>,
}

impl EafGrid {
    pub fn n_runs(&self) -> usize {
        self.n_runs
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn cells(&self) -> &[EafCell] {
        &self.cells
    }

    /// Number of runs attaining `z`; 0 outside the attained region and on or
    /// beyond the upper corner.
    pub fn count_at(&self, z: [f64; 2]) -> usize {
        self.cells
            .iter()
            .find(|c| c.contains(z))
            .map_or(0, |c| c.count)
    }

    pub fn fraction_at(&self, z: [f64; 2]) -> f64 {
        self.count_at(z) as f64 / self.n_runs as f64
    }

    /// Minimal points of the region attained by at least `k` runs.
    pub fn attainment_surface(&self, k: usize) -> Result<ParetoSet> {
        if k < 1 || k > self.n_runs {
            return Err(Error::LevelOutOfRange {
                level: k,
                runs: self.n_runs,
            });
        }
        let mut corners: Vec<ObjectiveVector> = self
            .cells
            .iter()
            .filter(|c| c.count >= k)
            .map(|c| ObjectiveVector::new(alloc::vec![c.x_lo, c.y_lo]))
            .collect::<Result<_>>()?;
        corners.sort_by(|a, b| lex_cmp(a, b));
        corners.dedup();
        nondominated_filter(&corners)
    }
}

/// Cell of an EAF difference, carrying the counts of both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffCell {
    pub x_lo: f64,
    pub y_lo: f64,
    pub x_hi: f64,
    pub y_hi: f64,
    pub count_a: usize,
    pub count_b: usize,
}

/// `fraction_A(z) - fraction_B(z)` as a rectangle decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct EafDiff {
    n_a: usize,
    n_b: usize,
    upper: [f64; 2],
    cells: Vec<DiffCell>,
}

impl EafDiff {
    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn cells(&self) -> &[DiffCell] {
        &self.cells
    }

    pub fn cell_fraction(&self, cell: &DiffCell) -> f64 {
        cell.count_a as f64 / self.n_a as f64 - cell.count_b as f64 / self.n_b as f64
    }

    pub fn fraction_at(&self, z: [f64; 2]) -> f64 {
        self.cells
            .iter()
            .find(|c| c.x_lo <= z[0] && z[0] < c.x_hi && c.y_lo <= z[1] && z[1] < c.y_hi)
            .map_or(0.0, |c| self.cell_fraction(c))
    }
}

/// A run's attainment boundary: its minimal points clipped to the box,
/// sorted by increasing x (and so decreasing y).
#[derive(Debug, Clone)]
struct Staircase {
    steps: Vec<[f64; 2]>,
}

impl Staircase {
    fn new<P: AsRef<[f64]>>(points: &[P], upper: [f64; 2]) -> Result<Self> {
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != 2 {
                return Err(Error::UnsupportedDimension {
                    found: p.len(),
                    supported: "2",
                });
            }
            if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite { index, value });
            }
            if p[0] < upper[0] && p[1] < upper[1] {
                pts.push([p[0], p[1]]);
            }
        }
        pts.sort_by(|a, b| lex_cmp(a, b));
        let mut steps: Vec<[f64; 2]> = Vec::new();
        for p in pts {
            if steps.last().is_none_or(|s| p[1] < s[1]) {
                steps.push(p);
            }
        }
        Ok(Self { steps })
    }

    /// Lowest attained y at abscissa `x`, given a cursor that only moves
    /// forward over increasing `x`.
    fn height(&self, x: f64, cursor: &mut usize) -> Option<f64> {
        while *cursor < self.steps.len() && self.steps[*cursor][0] <= x {
            *cursor += 1;
        }
        (*cursor > 0).then(|| self.steps[*cursor - 1][1])
    }
}

struct Rect {
    x_lo: f64,
    y_lo: f64,
    x_hi: f64,
    y_hi: f64,
    counts: Vec<usize>,
}

fn check_upper(upper: [f64; 2]) -> Result<()> {
    match upper.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        Some((index, &value)) => Err(Error::NonFinite { index, value }),
        None => Ok(()),
    }
}

/// Sweeps several groups of runs at once and returns the rectangles of the
/// attained region with one count per group. Adjacent columns with equal
/// rows are merged.
fn sweep(groups: &[Vec<Staircase>], upper: [f64; 2]) -> Vec<Rect> {
    let mut xs: Vec<f64> = groups
        .iter()
        .flatten()
        .flat_map(|s| s.steps.iter().map(|p| p[0]))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.push(upper[0]);

    let mut cursors: Vec<Vec<usize>> = groups.iter().map(|g| alloc::vec![0; g.len()]).collect();
    let mut done: Vec<Rect> = Vec::new();
    let mut open: Vec<Rect> = Vec::new();
    let mut heights: Vec<Vec<f64>> = alloc::vec![Vec::new(); groups.len()];
    let mut ys: Vec<f64> = Vec::new();
    for w in xs.windows(2) {
        let (x_lo, x_hi) = (w[0], w[1]);
        ys.clear();
        for (g, group) in groups.iter().enumerate() {
            heights[g].clear();
            for (r, run) in group.iter().enumerate() {
                if let Some(h) = run.height(x_lo, &mut cursors[g][r]) {
                    heights[g].push(h);
                    ys.push(h);
                }
            }
            heights[g].sort_by(f64::total_cmp);
        }
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let mut column: Vec<Rect> = Vec::with_capacity(ys.len());
        for (i, &y_lo) in ys.iter().enumerate() {
            let y_hi = ys.get(i + 1).copied().unwrap_or(upper[1]);
            let counts = heights
                .iter()
                .map(|h| h.partition_point(|&v| v <= y_lo))
                .collect();
            column.push(Rect {
                x_lo,
                y_lo,
                x_hi,
                y_hi,
                counts,
            });
        }
        let mut still_open = Vec::with_capacity(column.len());
        for rect in column {
            let same = open.iter().position(|o| {
                o.y_lo == rect.y_lo && o.y_hi == rect.y_hi && o.counts == rect.counts
            });
            match same {
                Some(i) => {
                    let mut o = open.swap_remove(i);
                    o.x_hi = rect.x_hi;
                    still_open.push(o);
                }
                None => still_open.push(rect),
            }
        }
        done.append(&mut open);
        open = still_open;
    }
    done.append(&mut open);
    done.sort_by(|a, b| {
        a.y_lo
            .total_cmp(&b.y_lo)
            .then_with(|| a.x_lo.total_cmp(&b.x_lo))
    });
    done
}

fn staircases<P: AsRef<[f64]>>(runs: &[Vec<P>], upper: [f64; 2], side: &'static str) -> Result<Vec<Staircase>> {
    if runs.is_empty() {
        return Err(Error::Empty(side));
    }
    runs.iter().map(|r| Staircase::new(r, upper)).collect()
}

/// Exact EAF of `runs` over the box below `upper`.
pub fn eaf<P: AsRef<[f64]>>(runs: &[Vec<P>], upper: [f64; 2]) -> Result<EafGrid> {
    check_upper(upper)?;
    let stairs = staircases(runs, upper, "run list")?;
    let cells = sweep(&[stairs], upper)
        .into_iter()
        .map(|r| EafCell {
            x_lo: r.x_lo,
            y_lo: r.y_lo,
            x_hi: r.x_hi,
            y_hi: r.y_hi,
            count: r.counts[0],
        })
        .collect();
    Ok(EafGrid {
        n_runs: runs.len(),
        upper,
        cells,
    })
}

/// Exact difference of the EAFs of two groups of runs.
pub fn eaf_diff<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[Vec<P>], b: &[Vec<Q>], upper: [f64; 2]) -> Result<EafDiff> {
    check_upper(upper)?;
    let sa = staircases(a, upper, "first run list")?;
    let sb = staircases(b, upper, "second run list")?;
    let cells = sweep(&[sa, sb], upper)
        .into_iter()
        .map(|r| DiffCell {
            x_lo: r.x_lo,
            y_lo: r.y_lo,
            x_hi: r.x_hi,
            y_hi: r.y_hi,
            count_a: r.counts[0],
            count_b: r.counts[1],
        })
        .collect();
    Ok(EafDiff {
        n_a: a.len(),
        n_b: b.len(),
        upper,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_point() {
        let g = eaf(&[vec![[0.5, 0.5]]], [1.0, 1.0]).unwrap();
        assert_eq!(
            g.cells(),
            &[EafCell {
                x_lo: 0.5,
                y_lo: 0.5,
                x_hi: 1.0,
                y_hi: 1.0,
                count: 1
            }]
        );
        assert_eq!(g.count_at([0.5, 0.5]), 1);
        assert_eq!(g.count_at([0.49, 0.9]), 0);
    }

    #[test]
    fn duplicated_runs_double_counts() {
        let run = vec![[0.2, 0.8], [0.6, 0.3]];
        let g = eaf(&[run.clone(), run.clone()], [1.0, 1.0]).unwrap();
        assert!(g.cells().iter().all(|c| c.count == 2));
        assert_eq!(g.count_at([0.7, 0.9]), 2);
        let surface = g.attainment_surface(2).unwrap();
        assert_eq!(surface.len(), 2);
        assert!(g.attainment_surface(3).is_err());
        assert!(g.attainment_surface(0).is_err());
    }

    #[test]
    fn nested_runs() {
        let good = vec![[0.1, 0.5], [0.5, 0.1]];
        let bad = vec![[0.6, 0.6]];
        let g = eaf(&[good.clone(), bad.clone()], [1.0, 1.0]).unwrap();
        assert_eq!(g.count_at([0.3, 0.7]), 1);
        assert_eq!(g.count_at([0.7, 0.7]), 2);
        let worst: Vec<Vec<f64>> = g
            .attainment_surface(2)
            .unwrap()
            .iter()
            .map(|p| p.to_vec())
            .collect();
        assert_eq!(worst, [[0.6, 0.6]]);
        let best: Vec<Vec<f64>> = g
            .attainment_surface(1)
            .unwrap()
            .iter()
            .map(|p| p.to_vec())
            .collect();
        assert_eq!(best, [[0.1, 0.5], [0.5, 0.1]]);
    }

    #[test]
    fn differences() {
        let a = vec![vec![[0.1, 0.5], [0.5, 0.1]], vec![[0.3, 0.3]]];
        let d = eaf_diff(&a, &a, [1.0, 1.0]).unwrap();
        assert!(d.cells().iter().all(|c| d.cell_fraction(c) == 0.0));
        let b = vec![vec![[0.6, 0.6]]];
        let d = eaf_diff(&a, &b, [1.0, 1.0]).unwrap();
        assert!(d.cells().iter().all(|c| d.cell_fraction(c) >= 0.0));
        assert_eq!(d.fraction_at([0.2, 0.9]), 0.5);
        assert_eq!(d.fraction_at([0.9, 0.9]), 0.0);
    }

    #[test]
    fn rejects_other_dimensions() {
        assert!(matches!(
            eaf(&[vec![vec![0.1, 0.2, 0.3]]], [1.0, 1.0]),
            Err(Error::UnsupportedDimension { found: 3, .. })
        ));
        let none: Vec<Vec<[f64; 2]>> = vec![];
        assert!(eaf(&none, [1.0, 1.0]).is_err());
    }
}
