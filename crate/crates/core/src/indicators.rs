//! Unary set-quality indicators and objective normalization.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::hypervolume::hypervolume;
use crate::objective::{check_common_dim, ideal_and_worst};
use crate::{Error, ObjectiveVector, ParetoSet, Result};

/// Reference coordinate used for hypervolume in normalized space.
pub const NORMALIZED_REFERENCE: f64 = 1.1;

/// Per-problem min-max normalization bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds {
    ideal: ObjectiveVector,
    worst: ObjectiveVector,
}

impl NormalizationBounds {
    pub fn new(ideal: ObjectiveVector, worst: ObjectiveVector) -> Result<Self> {
        if ideal.dim() != worst.dim() {
            return Err(Error::DimensionMismatch {
                expected: ideal.dim(),
                found: worst.dim(),
            });
        }
        if ideal.iter().zip(worst.iter()).any(|(i, w)| i > w) {
            return Err(Error::InvalidArgument(
                "ideal point must not exceed the worst point".to_string(),
            ));
        }
        Ok(Self { ideal, worst })
    }

    /// Bounds spanning exactly the given points.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let (ideal, worst) = ideal_and_worst(points)?;
        Self::new(ideal, worst)
    }

    /// Ideal at the origin, worst at the all-ones vector: normalization is
    /// the identity.
    pub fn identity(m: usize) -> Result<Self> {
        Self::new(ObjectiveVector::splat(0.0, m)?, ObjectiveVector::splat(1.0, m)?)
    }

    pub fn ideal(&self) -> &ObjectiveVector {
        &self.ideal
    }

    pub fn worst(&self) -> &ObjectiveVector {
        &self.worst
    }

    pub fn dim(&self) -> usize {
        self.ideal.dim()
    }

    /// `(f_i - ideal_i) / (worst_i - ideal_i)`, or 0 where the range is empty.
    pub fn normalize(&self, point: &[f64]) -> Result<ObjectiveVector> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.len(),
            });
        }
        ObjectiveVector::new(self.normalize_unchecked(point))
    }

    pub(crate) fn normalize_unchecked(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.ideal.iter().zip(self.worst.iter()))
            .map(|(&f, (&lo, &hi))| {
                let range = hi - lo;
                if range > 0.0 {
                    (f - lo) / range
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Inverse of [`normalize`](Self::normalize) on non-degenerate
    /// coordinates; degenerate coordinates map back to the ideal value.
    pub fn denormalize(&self, point: &[f64]) -> Result<ObjectiveVector> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.len(),
            });
        }
        ObjectiveVector::new(
            point
                .iter()
                .zip(self.ideal.iter().zip(self.worst.iter()))
                .map(|(&y, (&lo, &hi))| lo + y * (hi - lo))
                .collect(),
        )
    }
}

/// Free-function form of [`NormalizationBounds::normalize`].
pub fn normalize(point: &[f64], bounds: &NormalizationBounds) -> Result<ObjectiveVector> {
    bounds.normalize(point)
}

/// Hypervolume of the normalized set with reference `[1.1]^m`, divided by
/// the volume of the box between the origin and that reference.
pub fn hv_fraction<P: AsRef<[f64]>>(points: &[P], bounds: &NormalizationBounds) -> Result<f64> {
    let m = bounds.dim();
    let mut normalized = Vec::with_capacity(points.len());
    for p in points {
        normalized.push(bounds.normalize(p.as_ref())?);
    }
    let reference = alloc::vec![NORMALIZED_REFERENCE; m];
    Ok(hypervolume(&normalized, &reference)? / max_normalized_hypervolume(m))
}

/// `1.1^m`.
pub fn max_normalized_hypervolume(m: usize) -> f64 {
    libm::pow(NORMALIZED_REFERENCE, m as f64)
}

fn check_pair<A: AsRef<[f64]>, B: AsRef<[f64]>>(a: &[A], b: &[B]) -> Result<()> {
    let ma = check_common_dim(a)?.ok_or(Error::Empty("approximation set"))?;
    let mb = check_common_dim(b)?.ok_or(Error::Empty("reference set"))?;
    if ma != mb {
        return Err(Error::DimensionMismatch {
            expected: mb,
            found: ma,
        });
    }
    Ok(())
}

/// IGD+: mean over reference points `z` of the smallest dominance-aware
/// distance `sqrt(sum_i max(a_i - z_i, 0)^2)` from any point `a`.
pub fn igd_plus<A: AsRef<[f64]>, R: AsRef<[f64]>>(points: &[A], reference_set: &[R]) -> Result<f64> {
    check_pair(points, reference_set)?;
    let total: f64 = reference_set
        .iter()
        .map(|z| {
            let z = z.as_ref();
            points
                .iter()
                .map(|a| {
                    let sq: f64 = a
                        .as_ref()
                        .iter()
                        .zip(z)
                        .map(|(ai, zi)| {
                            let d = (ai - zi).max(0.0);
                            d * d
                        })
                        .sum();
                    libm::sqrt(sq)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference_set.len() as f64)
}

/// Smallest additive shift after which `points` weakly dominates every
/// member of `reference_set`.
pub fn epsilon_additive<A: AsRef<[f64]>, R: AsRef<[f64]>>(
    points: &[A],
    reference_set: &[R],
) -> Result<f64> {
    check_pair(points, reference_set)?;
    Ok(epsilon_with(points, reference_set, |a, r| a - r))
}

/// Smallest factor after which `points` weakly dominates every member of
/// `reference_set`. All coordinates must be strictly positive.
pub fn epsilon_multiplicative<A: AsRef<[f64]>, R: AsRef<[f64]>>(
    points: &[A],
    reference_set: &[R],
) -> Result<f64> {
    check_pair(points, reference_set)?;
    let positive = |s: &[f64]| s.iter().all(|&v| v > 0.0);
    if !points.iter().all(|p| positive(p.as_ref()))
        || !reference_set.iter().all(|r| positive(r.as_ref()))
    {
        return Err(Error::Domain(
            "multiplicative epsilon needs strictly positive coordinates",
        ));
    }
    Ok(epsilon_with(points, reference_set, |a, r| a / r))
}

fn epsilon_with<A: AsRef<[f64]>, R: AsRef<[f64]>>(
    points: &[A],
    reference_set: &[R],
    gap: impl Fn(f64, f64) -> f64,
) -> f64 {
    reference_set
        .iter()
        .map(|r| {
            let r = r.as_ref();
            points
                .iter()
                .map(|a| {
                    a.as_ref()
                        .iter()
                        .zip(r)
                        .map(|(&ai, &ri)| gap(ai, ri))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Weight vectors on the unit simplex plus the utopian point used by R2.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectorSet {
    vectors: Vec<Vec<f64>>,
    utopian: Vec<f64>,
}

impl WeightVectorSet {
    pub fn new(vectors: Vec<Vec<f64>>, utopian: Vec<f64>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty("weight vector set"));
        }
        let m = utopian.len();
        for w in &vectors {
            if w.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: w.len(),
                });
            }
            if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "weights must be finite and nonnegative".to_string(),
                ));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "weight vector sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { vectors, utopian })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn utopian(&self) -> &[f64] {
        &self.utopian
    }

    pub fn dim(&self) -> usize {
        self.utopian.len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Simplex-lattice design: every `m`-tuple of nonnegative integers summing to
/// `partitions`, divided by `partitions`. The utopian point is the origin.
pub fn generate_weights(m: usize, partitions: usize) -> Result<WeightVectorSet> {
    if partitions == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "simplex lattice needs m >= 1 and partitions >= 1".to_string(),
        ));
    }
    let mut out = Vec::new();
    let mut current = alloc::vec![0usize; m];
    lattice(&mut current, 0, partitions, &mut out, partitions);
    WeightVectorSet::new(out, alloc::vec![0.0; m])
}

fn lattice(current: &mut [usize], pos: usize, left: usize, out: &mut Vec<Vec<f64>>, total: usize) {
    if pos == current.len() - 1 {
        current[pos] = left;
        out.push(current.iter().map(|&c| c as f64 / total as f64).collect());
        return;
    }
    for c in 0..=left {
        current[pos] = c;
        lattice(current, pos + 1, left - c, out, total);
    }
}

/// Lattice resolution used when no weight set is given: 100 partitions for
/// two objectives, otherwise the smallest count giving at least 100 vectors
/// (13 for three objectives).
pub fn default_r2_partitions(m: usize) -> usize {
    if m <= 2 {
        return 100;
    }
    let mut p = 1;
    while binomial(p + m - 1, m - 1) < 100 {
        p += 1;
    }
    p
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// R2 with the weighted Tchebycheff utility: mean over weights of the best
/// `max_i w_i |a_i - u_i|` reached by any point.
pub fn r2<P: AsRef<[f64]>>(points: &[P], weights: &WeightVectorSet) -> Result<f64> {
    let m = check_common_dim(points)?.ok_or(Error::Empty("approximation set"))?;
    if m != weights.dim() {
        return Err(Error::DimensionMismatch {
            expected: weights.dim(),
            found: m,
        });
    }
    let u = weights.utopian();
    let total: f64 = weights
        .vectors()
        .iter()
        .map(|w| {
            points
                .iter()
                .map(|a| {
                    a.as_ref()
                        .iter()
                        .zip(w.iter().zip(u))
                        .map(|(ai, (wi, ui))| wi * (ai - ui).abs())
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / weights.len() as f64)
}

/// Whether larger indicator values are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// `a` strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndicatorKind {
    Hypervolume,
    IgdPlus,
    R2,
    EpsilonAdditive,
    EpsilonMultiplicative,
}

impl IndicatorKind {
    pub fn direction(self) -> Direction {
        match self {
            IndicatorKind::Hypervolume => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    /// Short name used in file names and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::Hypervolume => "hv",
            IndicatorKind::IgdPlus => "igdplus",
            IndicatorKind::R2 => "r2",
            IndicatorKind::EpsilonAdditive => "epsadd",
            IndicatorKind::EpsilonMultiplicative => "epsmul",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "hv" => IndicatorKind::Hypervolume,
            "igdplus" => IndicatorKind::IgdPlus,
            "r2" => IndicatorKind::R2,
            "epsadd" => IndicatorKind::EpsilonAdditive,
            "epsmul" => IndicatorKind::EpsilonMultiplicative,
            _ => return None,
        })
    }
}

/// An indicator together with the problem-specific input it needs. All
/// inputs live in the same (usually normalized) space as the points passed
/// to [`Indicator::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Indicator {
    Hypervolume { reference: ObjectiveVector },
    IgdPlus { reference_set: ParetoSet },
    R2 { weights: WeightVectorSet },
    EpsilonAdditive { reference_set: ParetoSet },
    EpsilonMultiplicative { reference_set: ParetoSet },
}

impl Indicator {
    /// Hypervolume with reference `[1.1]^m`.
    pub fn normalized_hypervolume(m: usize) -> Result<Self> {
        Ok(Indicator::Hypervolume {
            reference: ObjectiveVector::splat(NORMALIZED_REFERENCE, m)?,
        })
    }

    /// R2 on the default simplex lattice with the origin as utopian point.
    pub fn default_r2(m: usize) -> Result<Self> {
        Ok(Indicator::R2 {
            weights: generate_weights(m, default_r2_partitions(m))?,
        })
    }

    pub fn kind(&self) -> IndicatorKind {
        match self {
            Indicator::Hypervolume { .. } => IndicatorKind::Hypervolume,
            Indicator::IgdPlus { .. } => IndicatorKind::IgdPlus,
            Indicator::R2 { .. } => IndicatorKind::R2,
            Indicator::EpsilonAdditive { .. } => IndicatorKind::EpsilonAdditive,
            Indicator::EpsilonMultiplicative { .. } => IndicatorKind::EpsilonMultiplicative,
        }
    }

    pub fn direction(&self) -> Direction {
        self.kind().direction()
    }

    pub fn dim(&self) -> usize {
        match self {
            Indicator::Hypervolume { reference } => reference.dim(),
            Indicator::R2 { weights } => weights.dim(),
            Indicator::IgdPlus { reference_set }
            | Indicator::EpsilonAdditive { reference_set }
            | Indicator::EpsilonMultiplicative { reference_set } => {
                reference_set.dim().unwrap_or(0)
            }
        }
    }

    pub fn evaluate<P: AsRef<[f64]>>(&self, points: &[P]) -> Result<f64> {
        match self {
            Indicator::Hypervolume { reference } => hypervolume(points, reference),
            Indicator::IgdPlus { reference_set } => igd_plus(points, reference_set),
            Indicator::R2 { weights } => r2(points, weights),
            Indicator::EpsilonAdditive { reference_set } => epsilon_additive(points, reference_set),
            Indicator::EpsilonMultiplicative { reference_set } => {
                epsilon_multiplicative(points, reference_set)
            }
        }
    }
}
