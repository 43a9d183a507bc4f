//! Two-dimensional non-dominated staircase used by the 3-D filter sweep and
//! the 3-D hypervolume sweep.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Key(pub f64);

impl Key {
    // folds -0.0 into +0.0 so equal coordinates share a key
    pub(crate) fn new(x: f64) -> Self {
        Key(x + 0.0)
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Mutually non-dominated `(a, b)` pairs, sorted by `a` ascending (and
/// therefore `b` strictly descending).
#[derive(Debug, Default)]
pub(crate) struct Staircase {
    steps: BTreeMap<Key, f64>,
}

impl Staircase {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Whether some stored pair weakly dominates `(a, b)`.
    pub(crate) fn covers(&self, a: f64, b: f64) -> bool {
        self.steps
            .range(..=Key::new(a))
            .next_back()
            .is_some_and(|(_, &sb)| sb <= b)
    }

    /// Inserts `(a, b)` unless it is covered, dropping every pair it weakly
    /// dominates. Returns the area newly dominated inside the box bounded
    /// above by `bound`, which every stored pair must lie strictly below.
    pub(crate) fn insert(&mut self, a: f64, b: f64, bound: (f64, f64)) -> f64 {
        if self.covers(a, b) {
            return 0.0;
        }
        let mut upper = self
            .steps
            .range(..Key::new(a))
            .next_back()
            .map_or(bound.1, |(_, &pb)| pb);

        let mut removed: Vec<(f64, f64)> = Vec::new();
        let mut next_a = bound.0;
        for (k, &sb) in self.steps.range(Key::new(a)..) {
            if sb >= b {
                removed.push((k.0, sb));
            } else {
                next_a = k.0;
                break;
            }
        }

        let mut area = 0.0;
        let mut left = a;
        for &(ra, rb) in &removed {
            area += (ra - left) * (upper - b);
            self.steps.remove(&Key(ra));
            left = ra;
            upper = rb;
        }
        area += (next_a - left) * (upper - b);
        self.steps.insert(Key::new(a), b);
        area
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_accumulates_like_a_2d_sweep() {
        let mut s = Staircase::new();
        let bound = (1.0, 1.0);
        let mut total = s.insert(0.2, 0.8, bound);
        assert!((total - 0.16).abs() < 1e-15);
        total += s.insert(0.8, 0.2, bound);
        assert!((total - 0.28).abs() < 1e-15);
        // dominated: no change
        assert_eq!(s.insert(0.9, 0.9, bound), 0.0);
        // dominates both existing steps
        total += s.insert(0.1, 0.1, bound);
        assert!((total - 0.81).abs() < 1e-15);
        assert_eq!(s.steps.len(), 1);
    }

    #[test]
    fn equal_first_coordinate_replaces_worse_step() {
        let mut s = Staircase::new();
        let bound = (1.0, 1.0);
        let mut total = s.insert(0.5, 0.5, bound);
        total += s.insert(0.5, 0.25, bound);
        assert!((total - 0.375).abs() < 1e-15);
        assert!(s.covers(0.5, 0.25));
        assert!(!s.covers(0.4, 0.9));
    }
}
