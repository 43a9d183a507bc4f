//! Objective-space points, Pareto dominance and non-dominated filtering.
//!
//! Minimization is the only convention: maximization problems must be negated
//! before they reach this crate.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Deref;

use crate::staircase::Staircase;
use crate::{Error, Result};

/// Above this many points the 2-D and 3-D filters switch from pairwise
/// comparison to a sort-based sweep.
pub const PAIRWISE_FILTER_LIMIT: usize = 1000;

/// A point in `m`-dimensional objective space, `m >= 2`, all components
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewObjectives(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    /// A vector with `m` copies of `value`.
    pub fn splat(value: f64, m: usize) -> Result<Self> {
        Self::new(alloc::vec![value; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl<const M: usize> TryFrom<[f64; M]> for ObjectiveVector {
    type Error = Error;

    fn try_from(values: [f64; M]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// Decision-space representation of an evaluated point.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Real(Vec<f64>),
    Bits(Vec<bool>),
}

impl Decision {
    pub fn len(&self) -> usize {
        match self {
            Decision::Real(x) => x.len(),
            Decision::Bits(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One evaluation of a run: its 1-based position in the evaluation sequence
/// and the objective vector it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub eval_index: u64,
    pub objectives: ObjectiveVector,
    pub decision: Option<Decision>,
}

impl Solution {
    pub fn new(eval_index: u64, objectives: ObjectiveVector) -> Self {
        Self {
            eval_index,
            objectives,
            decision: None,
        }
    }

    pub fn with_decision(mut self, decision: Decision) -> Self {
        self.decision = Some(decision);
        self
    }
}

/// A set of mutually non-dominated objective vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParetoSet {
    points: Vec<ObjectiveVector>,
}

impl ParetoSet {
    /// Filters `points` down to their non-dominated subset.
    pub fn from_points(points: Vec<ObjectiveVector>) -> Result<Self> {
        check_common_dim(&points)?;
        let keep = nondominated_mask(&points);
        let points = points
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[ObjectiveVector] {
        &self.points
    }

    pub fn into_points(self) -> Vec<ObjectiveVector> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Objective dimension, `None` for the empty set.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.dim())
    }

    pub(crate) fn from_filtered_unchecked(points: Vec<ObjectiveVector>) -> Self {
        Self { points }
    }
}

impl Deref for ParetoSet {
    type Target = [ObjectiveVector];

    fn deref(&self) -> &[ObjectiveVector] {
        &self.points
    }
}

/// `a` dominates `b`: no worse in every component and strictly better in at
/// least one.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// `a` is no worse than `b` in every component.
#[inline]
pub(crate) fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub(crate) fn check_common_dim<P: AsRef<[f64]>>(points: &[P]) -> Result<Option<usize>> {
    let Some(first) = points.first() else {
        return Ok(None);
    };
    let m = first.as_ref().len();
    for p in points {
        if p.as_ref().len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.as_ref().len(),
            });
        }
    }
    Ok(Some(m))
}

/// The points of `points` not dominated by any other point, in input order.
/// Duplicates do not dominate each other and are all kept.
pub fn nondominated_filter(points: &[ObjectiveVector]) -> Result<ParetoSet> {
    check_common_dim(points)?;
    let keep = nondominated_mask(points);
    let survivors = points
        .iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then(|| p.clone()))
        .collect();
    Ok(ParetoSet::from_filtered_unchecked(survivors))
}

/// `mask[i]` is true iff `points[i]` is non-dominated. All points must share
/// one dimension.
pub fn nondominated_mask<P: AsRef<[f64]>>(points: &[P]) -> Vec<bool> {
    let m = points.first().map_or(0, |p| p.as_ref().len());
    if points.len() > PAIRWISE_FILTER_LIMIT && (m == 2 || m == 3) {
        sweep_mask(points)
    } else {
        pairwise_mask(points)
    }
}

/// O(n²) reference filter.
pub fn pairwise_mask<P: AsRef<[f64]>>(points: &[P]) -> Vec<bool> {
    let mut keep = alloc::vec![true; points.len()];
    for (i, p) in points.iter().enumerate() {
        let p = p.as_ref();
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates_unchecked(q.as_ref(), p) {
                keep[i] = false;
                break;
            }
        }
    }
    keep
}

/// Sort-based filter for 2 or 3 objectives. Panics on any other dimension.
pub fn sweep_mask<P: AsRef<[f64]>>(points: &[P]) -> Vec<bool> {
    let m = points.first().map_or(2, |p| p.as_ref().len());
    match m {
        2 => sweep_mask_2d(points),
        3 => sweep_mask_3d(points),
        _ => panic!("sweep filter supports 2 or 3 objectives, got {m}"),
    }
}

fn lex_order<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(points[i].as_ref(), points[j].as_ref()));
    order
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or_else(|| x.total_cmp(y)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Visits runs of equal first coordinate in lexicographic order.
fn for_each_x_group<P: AsRef<[f64]>>(points: &[P], order: &[usize], mut f: impl FnMut(&[usize])) {
    let mut start = 0;
    while start < order.len() {
        let x = points[order[start]].as_ref()[0];
        let mut end = start + 1;
        while end < order.len() && points[order[end]].as_ref()[0] == x {
            end += 1;
        }
        f(&order[start..end]);
        start = end;
    }
}

fn sweep_mask_2d<P: AsRef<[f64]>>(points: &[P]) -> Vec<bool> {
    let order = lex_order(points);
    let mut keep = alloc::vec![true; points.len()];
    let mut best_before = f64::INFINITY;
    for_each_x_group(points, &order, |group| {
        // lexicographic order puts the group's minimum second coordinate first
        let group_min = points[group[0]].as_ref()[1];
        for &i in group {
            let y = points[i].as_ref()[1];
            if best_before <= y || group_min < y {
                keep[i] = false;
            }
        }
        best_before = best_before.min(group_min);
    });
    keep
}

fn sweep_mask_3d<P: AsRef<[f64]>>(points: &[P]) -> Vec<bool> {
    let order = lex_order(points);
    let mut keep = alloc::vec![true; points.len()];
    let mut stair = Staircase::new();
    let unbounded = (f64::INFINITY, f64::INFINITY);
    for_each_x_group(points, &order, |group| {
        let projected: Vec<[f64; 2]> = group
            .iter()
            .map(|&i| {
                let p = points[i].as_ref();
                [p[1], p[2]]
            })
            .collect();
        let within = sweep_mask_2d(&projected);
        for (&i, inside) in group.iter().zip(within) {
            let p = points[i].as_ref();
            if !inside || stair.covers(p[1], p[2]) {
                keep[i] = false;
            }
        }
        for &i in group {
            let p = points[i].as_ref();
            stair.insert(p[1], p[2], unbounded);
        }
    });
    keep
}

/// Componentwise minimum (ideal) and maximum (worst) of a non-empty set.
pub fn ideal_and_worst<P: AsRef<[f64]>>(points: &[P]) -> Result<(ObjectiveVector, ObjectiveVector)> {
    let m = check_common_dim(points)?.ok_or(Error::Empty("ideal/worst of an empty set"))?;
    let mut ideal = alloc::vec![f64::INFINITY; m];
    let mut worst = alloc::vec![f64::NEG_INFINITY; m];
    for p in points {
        for (k, &v) in p.as_ref().iter().enumerate() {
            ideal[k] = ideal[k].min(v);
            worst[k] = worst[k].max(v);
        }
    }
    Ok((ObjectiveVector::new(ideal)?, ObjectiveVector::new(worst)?))
}
