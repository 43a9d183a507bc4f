//! ZDT and DTLZ benchmark problems.
//!
//! Every problem is translated so that the single-objective minimum of each
//! objective is exactly 0. Default decision-space sizes are the canonical
//! ones from the suite definitions: ZDT1–3 use 30 variables, ZDT4 and ZDT6
//! use 10, ZDT5 uses 11 bit-string variables (30 + 10 × 5 bits), and DTLZ1,
//! DTLZ2 and DTLZ7 use `m + 4`, `m + 9` and `m + 19` variables (7, 12 and 22
//! for three objectives).

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, pow, sin, sqrt};
use rand::Rng;

use crate::{Decision, Error, ObjectiveVector, Result};

/// `min over x in [0,1] of 1 - sqrt(x) - x sin(10 pi x)`, the lowest value
/// of the second ZDT3 objective.
pub const ZDT3_F2_MIN: f64 = -0.773_369_012_326_640_4;

/// `min over x in [0,1] of 1 - exp(-4x) sin^6(6 pi x)`, the lowest value of
/// the first ZDT6 objective.
pub const ZDT6_F1_MIN: f64 = 0.280_775_318_815_369_7;

/// `max over t in [0,1] of t (1 + sin(3 pi t))`, which fixes the lowest value
/// of the last DTLZ7 objective at `2m - (m-1) * DTLZ7_TERM_MAX`.
pub const DTLZ7_TERM_MAX: f64 = 1.692_995_634_498_422_4;

const ZDT5_HEAD_BITS: usize = 30;
const ZDT5_TAIL_BITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt5,
    Zdt6,
    Dtlz1,
    Dtlz2,
    Dtlz7,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 9] = [
        ProblemKind::Zdt1,
        ProblemKind::Zdt2,
        ProblemKind::Zdt3,
        ProblemKind::Zdt4,
        ProblemKind::Zdt5,
        ProblemKind::Zdt6,
        ProblemKind::Dtlz1,
        ProblemKind::Dtlz2,
        ProblemKind::Dtlz7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Zdt1 => "ZDT1",
            ProblemKind::Zdt2 => "ZDT2",
            ProblemKind::Zdt3 => "ZDT3",
            ProblemKind::Zdt4 => "ZDT4",
            ProblemKind::Zdt5 => "ZDT5",
            ProblemKind::Zdt6 => "ZDT6",
            ProblemKind::Dtlz1 => "DTLZ1",
            ProblemKind::Dtlz2 => "DTLZ2",
            ProblemKind::Dtlz7 => "DTLZ7",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownProblem(name.to_string()))
    }

    pub fn suite(self) -> &'static str {
        if self.is_zdt() {
            "ZDT"
        } else {
            "DTLZ"
        }
    }

    fn is_zdt(self) -> bool {
        matches!(
            self,
            ProblemKind::Zdt1
                | ProblemKind::Zdt2
                | ProblemKind::Zdt3
                | ProblemKind::Zdt4
                | ProblemKind::Zdt5
                | ProblemKind::Zdt6
        )
    }

    fn default_m(self) -> usize {
        if self.is_zdt() {
            2
        } else {
            3
        }
    }

    fn default_n(self, m: usize) -> usize {
        match self {
            ProblemKind::Zdt1 | ProblemKind::Zdt2 | ProblemKind::Zdt3 => 30,
            ProblemKind::Zdt4 | ProblemKind::Zdt6 => 10,
            ProblemKind::Zdt5 => 11,
            ProblemKind::Dtlz1 => m + 4,
            ProblemKind::Dtlz2 => m + 9,
            ProblemKind::Dtlz7 => m + 19,
        }
    }
}

/// Decision-space domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Per-variable `(lower, upper)` bounds.
    Continuous(Vec<(f64, f64)>),
    /// Per-variable bit lengths; the decision is their concatenation.
    Binary(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    kind: ProblemKind,
    n: usize,
    m: usize,
    domain: Domain,
    translation: Vec<f64>,
}

impl ProblemSpec {
    /// The problem with its default dimensions.
    pub fn new(name: &str) -> Result<Self> {
        Self::with_dimensions(name, None, None)
    }

    pub fn with_dimensions(name: &str, n: Option<usize>, m: Option<usize>) -> Result<Self> {
        let kind = ProblemKind::from_name(name)?;
        let m = m.unwrap_or(kind.default_m());
        if kind.is_zdt() && m != 2 {
            return Err(Error::InvalidArgument(format!(
                "{} has exactly 2 objectives, got {m}",
                kind.name()
            )));
        }
        if m < 2 {
            return Err(Error::TooFewObjectives(m));
        }
        let n = n.unwrap_or(kind.default_n(m));
        let min_n = if kind.is_zdt() { 2 } else { m };
        if n < min_n {
            return Err(Error::InvalidArgument(format!(
                "{} with {m} objectives needs at least {min_n} variables, got {n}",
                kind.name()
            )));
        }
        let domain = match kind {
            ProblemKind::Zdt5 => {
                let mut bits = alloc::vec![ZDT5_TAIL_BITS; n];
                bits[0] = ZDT5_HEAD_BITS;
                Domain::Binary(bits)
            }
            ProblemKind::Zdt4 => {
                let mut b = alloc::vec![(-5.0, 5.0); n];
                b[0] = (0.0, 1.0);
                Domain::Continuous(b)
            }
            _ => Domain::Continuous(alloc::vec![(0.0, 1.0); n]),
        };
        let mut translation = alloc::vec![0.0; m];
        match kind {
            ProblemKind::Zdt3 => translation[1] = ZDT3_F2_MIN,
            ProblemKind::Zdt5 => {
                translation[0] = 1.0;
                translation[1] = (n - 1) as f64 / (ZDT5_HEAD_BITS + 1) as f64;
            }
            ProblemKind::Zdt6 => translation[0] = ZDT6_F1_MIN,
            ProblemKind::Dtlz7 => {
                translation[m - 1] = 2.0 * m as f64 - (m - 1) as f64 * DTLZ7_TERM_MAX;
            }
            _ => {}
        }
        Ok(Self {
            kind,
            n,
            m,
            domain,
            translation,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn suite(&self) -> &'static str {
        self.kind.suite()
    }

    /// Number of decision variables (bit-string variables count once).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Offsets subtracted from the raw objectives.
    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    /// Length of the encoded decision: `n` for continuous problems, the total
    /// bit count for binary ones.
    pub fn encoded_len(&self) -> usize {
        match &self.domain {
            Domain::Continuous(b) => b.len(),
            Domain::Binary(bits) => bits.iter().sum(),
        }
    }

    /// Translated objective vector of `x`.
    pub fn evaluate(&self, x: &Decision) -> Result<ObjectiveVector> {
        self.check(x)?;
        let mut f = self.raw(x);
        for (fi, t) in f.iter_mut().zip(&self.translation) {
            *fi -= t;
        }
        ObjectiveVector::new(f)
    }

    fn check(&self, x: &Decision) -> Result<()> {
        match (&self.domain, x) {
            (Domain::Continuous(bounds), Decision::Real(v)) => {
                if v.len() != bounds.len() {
                    return Err(Error::BadDecision(format!(
                        "expected {} variables, got {}",
                        bounds.len(),
                        v.len()
                    )));
                }
                for (index, (&value, &(lower, upper))) in v.iter().zip(bounds).enumerate() {
                    if !(lower..=upper).contains(&value) {
                        return Err(Error::OutOfBounds {
                            index,
                            value,
                            lower,
                            upper,
                        });
                    }
                }
                Ok(())
            }
            (Domain::Binary(_), Decision::Bits(b)) => {
                if b.len() != self.encoded_len() {
                    return Err(Error::BadDecision(format!(
                        "expected {} bits, got {}",
                        self.encoded_len(),
                        b.len()
                    )));
                }
                Ok(())
            }
            (Domain::Continuous(_), Decision::Bits(_)) => Err(Error::BadDecision(
                "bit string given to a continuous problem".to_string(),
            )),
            (Domain::Binary(_), Decision::Real(_)) => Err(Error::BadDecision(
                "real vector given to a bit-string problem".to_string(),
            )),
        }
    }

    fn raw(&self, x: &Decision) -> Vec<f64> {
        match x {
            Decision::Real(v) => match self.kind {
                ProblemKind::Zdt1 => zdt1(v),
                ProblemKind::Zdt2 => zdt2(v),
                ProblemKind::Zdt3 => zdt3(v),
                ProblemKind::Zdt4 => zdt4(v),
                ProblemKind::Zdt6 => zdt6(v),
                ProblemKind::Dtlz1 => dtlz1(v, self.m),
                ProblemKind::Dtlz2 => dtlz2(v, self.m),
                ProblemKind::Dtlz7 => dtlz7(v, self.m),
                ProblemKind::Zdt5 => unreachable!("checked by domain"),
            },
            Decision::Bits(b) => {
                let Domain::Binary(lengths) = &self.domain else {
                    unreachable!("checked by domain")
                };
                zdt5(b, lengths)
            }
        }
    }

    /// A uniform random point of the domain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Decision {
        match &self.domain {
            Domain::Continuous(bounds) => Decision::Real(
                bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect(),
            ),
            Domain::Binary(_) => {
                Decision::Bits((0..self.encoded_len()).map(|_| rng.random::<bool>()).collect())
            }
        }
    }
}

fn zdt_g_linear(x: &[f64]) -> f64 {
    1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64
}

fn zdt1(x: &[f64]) -> Vec<f64> {
    let f1 = x[0];
    let g = zdt_g_linear(x);
    alloc::vec![f1, g * (1.0 - sqrt(f1 / g))]
}

fn zdt2(x: &[f64]) -> Vec<f64> {
    let f1 = x[0];
    let g = zdt_g_linear(x);
    alloc::vec![f1, g * (1.0 - (f1 / g) * (f1 / g))]
}

fn zdt3(x: &[f64]) -> Vec<f64> {
    let f1 = x[0];
    let g = zdt_g_linear(x);
    let r = f1 / g;
    alloc::vec![f1, g * (1.0 - sqrt(r) - r * sin(10.0 * PI * f1))]
}

fn zdt4(x: &[f64]) -> Vec<f64> {
    let f1 = x[0];
    let g = 1.0
        + 10.0 * (x.len() - 1) as f64
        + x[1..]
            .iter()
            .map(|&xi| xi * xi - 10.0 * cos(4.0 * PI * xi))
            .sum::<f64>();
    alloc::vec![f1, g * (1.0 - sqrt(f1 / g))]
}

fn zdt5(bits: &[bool], lengths: &[usize]) -> Vec<f64> {
    let mut ones = Vec::with_capacity(lengths.len());
    let mut start = 0;
    for &len in lengths {
        ones.push(bits[start..start + len].iter().filter(|&&b| b).count());
        start += len;
    }
    let f1 = 1.0 + ones[0] as f64;
    let g: f64 = ones[1..]
        .iter()
        .map(|&u| if u < ZDT5_TAIL_BITS { 2.0 + u as f64 } else { 1.0 })
        .sum();
    alloc::vec![f1, g / f1]
}

fn zdt6(x: &[f64]) -> Vec<f64> {
    let f1 = 1.0 - exp(-4.0 * x[0]) * pow(sin(6.0 * PI * x[0]), 6.0);
    let g = 1.0 + 9.0 * pow(x[1..].iter().sum::<f64>() / (x.len() - 1) as f64, 0.25);
    alloc::vec![f1, g * (1.0 - (f1 / g) * (f1 / g))]
}

fn dtlz1(x: &[f64], m: usize) -> Vec<f64> {
    let tail = &x[m - 1..];
    let g = 100.0
        * (tail.len() as f64
            + tail
                .iter()
                .map(|&xi| (xi - 0.5) * (xi - 0.5) - cos(20.0 * PI * (xi - 0.5)))
                .sum::<f64>());
    (0..m)
        .map(|i| {
            let mut f = 0.5 * (1.0 + g);
            f *= x[..m - 1 - i].iter().product::<f64>();
            if i > 0 {
                f *= 1.0 - x[m - 1 - i];
            }
            f
        })
        .collect()
}

fn dtlz2(x: &[f64], m: usize) -> Vec<f64> {
    let g: f64 = x[m - 1..].iter().map(|&xi| (xi - 0.5) * (xi - 0.5)).sum();
    (0..m)
        .map(|i| {
            let mut f = 1.0 + g;
            f *= x[..m - 1 - i]
                .iter()
                .map(|&xj| cos(xj * PI / 2.0))
                .product::<f64>();
            if i > 0 {
                f *= sin(x[m - 1 - i] * PI / 2.0);
            }
            f
        })
        .collect()
}

fn dtlz7(x: &[f64], m: usize) -> Vec<f64> {
    let tail = &x[m - 1..];
    let g = 1.0 + 9.0 * tail.iter().sum::<f64>() / tail.len() as f64;
    let mut f: Vec<f64> = x[..m - 1].to_vec();
    let h = m as f64
        - f.iter()
            .map(|&fi| fi / (1.0 + g) * (1.0 + sin(3.0 * PI * fi)))
            .sum::<f64>();
    f.push((1.0 + g) * h);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn real(v: Vec<f64>) -> Decision {
        Decision::Real(v)
    }

    #[test]
    fn zdt1_examples() {
        let p = ProblemSpec::new("ZDT1").unwrap();
        assert_eq!(p.n(), 30);
        let f = p.evaluate(&real(vec![0.0; 30])).unwrap();
        assert_eq!(f.as_slice(), &[0.0, 1.0]);
        let mut x = vec![0.0; 30];
        x[0] = 1.0;
        assert_eq!(p.evaluate(&real(x)).unwrap().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn dtlz2_example() {
        let p = ProblemSpec::new("DTLZ2").unwrap();
        assert_eq!((p.n(), p.m()), (12, 3));
        let f = p.evaluate(&real(vec![0.5; 12])).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15);
        assert!((f[1] - 0.5).abs() < 1e-15);
        assert!((f[2] - sqrt(2.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let p = ProblemSpec::new("ZDT1").unwrap();
        let mut x = vec![0.0; 30];
        x[3] = 1.5;
        assert!(matches!(p.evaluate(&real(x)), Err(Error::OutOfBounds { index: 3, .. })));
        assert!(p.evaluate(&real(vec![0.0; 29])).is_err());
        assert!(p.evaluate(&Decision::Bits(vec![false; 30])).is_err());
        assert!(matches!(ProblemSpec::new("ZDT9"), Err(Error::UnknownProblem(_))));
        assert!(ProblemSpec::with_dimensions("ZDT1", None, Some(3)).is_err());
    }

    #[test]
    fn default_sizes() {
        let sizes: Vec<(usize, usize)> = ProblemKind::ALL
            .iter()
            .map(|k| {
                let p = ProblemSpec::new(k.name()).unwrap();
                (p.n(), p.m())
            })
            .collect();
        assert_eq!(
            sizes,
            [(30, 2), (30, 2), (30, 2), (10, 2), (11, 2), (10, 2), (7, 3), (12, 3), (22, 3)]
        );
        assert_eq!(ProblemSpec::new("ZDT5").unwrap().encoded_len(), 80);
    }

    #[test]
    fn problem_names_are_case_insensitive() {
        assert_eq!(ProblemKind::from_name("dtlz7").unwrap(), ProblemKind::Dtlz7);
    }
}
