//! Exact hypervolume.
//!
//! Only points strictly better than the reference point in every objective
//! contribute; the rest are dropped before any volume is computed. Two
//! objectives use a sorted sweep, three a dimension sweep over a staircase,
//! and four or more the WFG exclusive-volume recursion, which is exponential
//! in the number of objectives.

use alloc::vec::Vec;

use crate::objective::{check_common_dim, lex_cmp, nondominated_mask, weakly_dominates};
use crate::staircase::Staircase;
use crate::{Error, Result};

/// Hypervolume of `points` with respect to `reference`.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> Result<f64> {
    let front = contributing_front(points, reference)?;
    Ok(match reference.len() {
        0 => 0.0,
        1 => front.first().map_or(0.0, |p| reference[0] - p[0]),
        2 => sweep_2d(&front, reference),
        3 => sweep_3d(&front, reference),
        _ => wfg(front, reference),
    })
}

/// Hypervolume through the generic WFG recursion regardless of dimension.
/// Exposed so the specialised sweeps can be checked against it.
pub fn hypervolume_recursive<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> Result<f64> {
    let front = contributing_front(points, reference)?;
    Ok(wfg(front, reference))
}

/// Deduplicated non-dominated points strictly inside the reference box,
/// sorted lexicographically.
fn contributing_front<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(m) = check_common_dim(points)? {
        if m != reference.len() {
            return Err(Error::DimensionMismatch {
                expected: reference.len(),
                found: m,
            });
        }
    }
    if let Some((index, &value)) = reference.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let mut inside: Vec<Vec<f64>> = points
        .iter()
        .map(AsRef::as_ref)
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .map(<[f64]>::to_vec)
        .collect();
    inside.sort_by(|a, b| lex_cmp(a, b));
    inside.dedup();
    let keep = nondominated_mask(&inside);
    Ok(inside
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect())
}

/// Expects a sorted, mutually non-dominated front.
fn sweep_2d(front: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in front {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

fn sweep_3d(front: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut order: Vec<&Vec<f64>> = front.iter().collect();
    order.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut stair = Staircase::new();
    let bound = (reference[0], reference[1]);
    let mut area = 0.0;
    let mut volume = 0.0;
    for (i, p) in order.iter().enumerate() {
        area += stair.insert(p[0], p[1], bound);
        let next = order.get(i + 1).map_or(reference[2], |q| q[2]);
        volume += area * (next - p[2]);
    }
    volume
}

fn box_volume(p: &[f64], reference: &[f64]) -> f64 {
    p.iter().zip(reference).map(|(x, r)| r - x).product()
}

/// WFG: the volume of a front is the sum over its points of the volume each
/// point adds to the points after it, where the added volume is the point's
/// own box minus the volume of the later points clipped to that box.
fn wfg(mut front: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    match front.len() {
        0 => return 0.0,
        1 => return box_volume(&front[0], reference),
        _ => {}
    }
    // decreasing last objective makes the limited sets small
    front.sort_by(|a, b| {
        let k = a.len() - 1;
        b[k].total_cmp(&a[k]).then_with(|| lex_cmp(a, b))
    });
    (0..front.len())
        .map(|i| exclusive_volume(&front[i], &front[i + 1..], reference))
        .sum()
}

fn exclusive_volume(point: &[f64], rest: &[Vec<f64>], reference: &[f64]) -> f64 {
    box_volume(point, reference) - wfg(limit_set(point, rest), reference)
}

/// Points of `rest` moved onto the box of `point`, reduced to the
/// non-dominated, deduplicated subset.
fn limit_set(point: &[f64], rest: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut limited: Vec<Vec<f64>> = Vec::with_capacity(rest.len());
    for q in rest {
        let clipped: Vec<f64> = q.iter().zip(point).map(|(a, b)| a.max(*b)).collect();
        if limited.iter().any(|l| weakly_dominates(l, &clipped)) {
            continue;
        }
        limited.retain(|l| !weakly_dominates(&clipped, l));
        limited.push(clipped);
    }
    limited
}
