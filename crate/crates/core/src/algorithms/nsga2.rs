use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::cmp::Ordering;

use libm::pow;
use rand::Rng;

use crate::objective::dominates_unchecked;
use crate::problems::{Domain, ProblemSpec};
use crate::{Decision, Error, ObjectiveVector, Result, Solution};

/// SBX distribution index.
pub const ETA_C: f64 = 15.0;
/// Crossover probability per mating pair.
pub const P_C: f64 = 0.9;
/// Polynomial-mutation distribution index.
pub const ETA_M: f64 = 20.0;

#[derive(Debug, Clone)]
struct Member {
    eval_index: u64,
    decision: Decision,
    objectives: ObjectiveVector,
    rank: usize,
    crowding: f64,
}

/// Generational NSGA-II streaming its evaluations.
///
/// The first `mu` evaluations are the uniform random initial population.
/// Each later generation evaluates `mu` offspring bred by binary tournament,
/// SBX and polynomial mutation (uniform crossover and bit flips on
/// bit-string problems) and then keeps the best `mu` of parents and
/// offspring. When the budget runs out mid-generation the survivors are
/// selected from the offspring evaluated so far.
#[derive(Debug, Clone)]
pub struct Nsga2<'a, R> {
    problem: &'a ProblemSpec,
    mu: usize,
    budget: u64,
    evaluated: u64,
    rng: R,
    population: Vec<Member>,
    offspring: Vec<Member>,
    pending: VecDeque<Decision>,
}

impl<'a, R: Rng> Nsga2<'a, R> {
    pub fn new(problem: &'a ProblemSpec, mu: usize, budget: u64, rng: R) -> Result<Self> {
        if mu < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "population size must be at least 2, got {mu}"
            )));
        }
        if budget < mu as u64 {
            return Err(Error::InvalidArgument(alloc::format!(
                "budget {budget} is smaller than the population size {mu}"
            )));
        }
        Ok(Self {
            problem,
            mu,
            budget,
            evaluated: 0,
            rng,
            population: Vec::with_capacity(mu),
            offspring: Vec::with_capacity(mu),
            pending: VecDeque::with_capacity(mu),
        })
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// Current parent population ordered by evaluation index.
    pub fn population(&self) -> Vec<Solution> {
        self.population
            .iter()
            .map(|m| Solution::new(m.eval_index, m.objectives.clone()).with_decision(m.decision.clone()))
            .collect()
    }

    fn evaluate(&mut self, decision: Decision) -> Member {
        self.evaluated += 1;
        let objectives = self
            .problem
            .evaluate(&decision)
            .expect("variation keeps decisions inside the domain");
        Member {
            eval_index: self.evaluated,
            decision,
            objectives,
            rank: 0,
            crowding: 0.0,
        }
    }

    fn select(&mut self, mut pool: Vec<Member>) {
        let keyed: Vec<(u64, &[f64])> = pool
            .iter()
            .map(|m| (m.eval_index, m.objectives.as_slice()))
            .collect();
        let (ranks, crowding) = rank_and_crowding(&keyed);
        let keep = select_from_ranked(&keyed, &ranks, &crowding, self.mu);
        for (i, m) in pool.iter_mut().enumerate() {
            m.rank = ranks[i];
            m.crowding = crowding[i];
        }
        let mut flags = alloc::vec![false; pool.len()];
        for i in keep {
            flags[i] = true;
        }
        self.population = pool
            .into_iter()
            .zip(flags)
            .filter_map(|(m, k)| k.then_some(m))
            .collect();
        self.population.sort_by_key(|m| m.eval_index);
    }

    fn tournament(&mut self) -> usize {
        let n = self.population.len();
        let a = self.rng.random_range(0..n);
        let b = self.rng.random_range(0..n);
        let (pa, pb) = (&self.population[a], &self.population[b]);
        let a_wins = pa
            .rank
            .cmp(&pb.rank)
            .then_with(|| pb.crowding.total_cmp(&pa.crowding))
            .then_with(|| pa.eval_index.cmp(&pb.eval_index))
            != Ordering::Greater;
        if a_wins {
            a
        } else {
            b
        }
    }

    fn breed(&mut self) {
        while self.pending.len() < self.mu {
            let a = self.tournament();
            let b = self.tournament();
            let pa = self.population[a].decision.clone();
            let pb = self.population[b].decision.clone();
            let (c1, c2) = match (self.problem.domain(), pa, pb) {
                (Domain::Continuous(bounds), Decision::Real(x1), Decision::Real(x2)) => {
                    let bounds = bounds.clone();
                    let (mut y1, mut y2) = sbx(&mut self.rng, &x1, &x2, &bounds);
                    polynomial_mutation(&mut self.rng, &mut y1, &bounds);
                    polynomial_mutation(&mut self.rng, &mut y2, &bounds);
                    (Decision::Real(y1), Decision::Real(y2))
                }
                (Domain::Binary(_), Decision::Bits(x1), Decision::Bits(x2)) => {
                    let (mut y1, mut y2) = uniform_crossover(&mut self.rng, &x1, &x2);
                    bit_flip(&mut self.rng, &mut y1);
                    bit_flip(&mut self.rng, &mut y2);
                    (Decision::Bits(y1), Decision::Bits(y2))
                }
                _ => unreachable!("population decisions match the domain"),
            };
            self.pending.push_back(c1);
            if self.pending.len() < self.mu {
                self.pending.push_back(c2);
            }
        }
    }
}

impl<R: Rng> Iterator for Nsga2<'_, R> {
    type Item = Solution;

    fn next(&mut self) -> Option<Solution> {
        if self.evaluated == self.budget {
            return None;
        }
        if self.evaluated < self.mu as u64 {
            let x = self.problem.sample(&mut self.rng);
            let member = self.evaluate(x);
            let out = Solution::new(member.eval_index, member.objectives.clone())
                .with_decision(member.decision.clone());
            self.population.push(member);
            if self.population.len() == self.mu {
                let initial = core::mem::take(&mut self.population);
                self.select(initial);
            }
            return Some(out);
        }
        if self.pending.is_empty() {
            self.breed();
        }
        let x = self.pending.pop_front().expect("bred a full generation");
        let member = self.evaluate(x);
        let out = Solution::new(member.eval_index, member.objectives.clone())
            .with_decision(member.decision.clone());
        self.offspring.push(member);
        if self.offspring.len() == self.mu || self.evaluated == self.budget {
            let mut pool = core::mem::take(&mut self.population);
            pool.append(&mut self.offspring);
            self.pending.clear();
            self.select(pool);
        }
        Some(out)
    }
}

/// Non-domination rank (0 = first front) and crowding distance of every
/// member of `pool`, given as `(eval_index, objectives)` pairs.
pub fn rank_and_crowding(pool: &[(u64, &[f64])]) -> (Vec<usize>, Vec<f64>) {
    let n = pool.len();
    let mut dominated_by_count = alloc::vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_unchecked(pool[i].1, pool[j].1) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(pool[j].1, pool[i].1) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut ranks = alloc::vec![0usize; n];
    let mut crowding = alloc::vec![0.0; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut rank = 0;
    while !front.is_empty() {
        for &i in &front {
            ranks[i] = rank;
        }
        assign_crowding(pool, &front, &mut crowding);
        let mut next = Vec::new();
        for &i in &front {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        front = next;
        rank += 1;
    }
    (ranks, crowding)
}

fn assign_crowding(pool: &[(u64, &[f64])], front: &[usize], crowding: &mut [f64]) {
    for &i in front {
        crowding[i] = 0.0;
    }
    if front.len() <= 2 {
        for &i in front {
            crowding[i] = f64::INFINITY;
        }
        return;
    }
    let m = pool[front[0]].1.len();
    let mut order = front.to_vec();
    for k in 0..m {
        order.sort_by(|&a, &b| {
            pool[a].1[k]
                .total_cmp(&pool[b].1[k])
                .then_with(|| pool[a].0.cmp(&pool[b].0))
        });
        let lo = pool[order[0]].1[k];
        let hi = pool[order[order.len() - 1]].1[k];
        crowding[order[0]] = f64::INFINITY;
        crowding[order[order.len() - 1]] = f64::INFINITY;
        if hi == lo {
            continue;
        }
        for w in 1..order.len() - 1 {
            let gap = pool[order[w + 1]].1[k] - pool[order[w - 1]].1[k];
            crowding[order[w]] += gap / (hi - lo);
        }
    }
}

fn select_from_ranked(pool: &[(u64, &[f64])], ranks: &[usize], crowding: &[f64], mu: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        ranks[a]
            .cmp(&ranks[b])
            .then_with(|| crowding[b].total_cmp(&crowding[a]))
            .then_with(|| pool[a].0.cmp(&pool[b].0))
    });
    order.truncate(mu);
    order
}

/// Indices of the `mu` survivors of `pool` under non-dominated sorting with
/// crowding-distance truncation; ties go to the lower evaluation index.
/// Depends only on the objective vectors and evaluation indices, so a logged
/// run can be replayed without its decisions.
pub fn select_survivors(pool: &[(u64, &[f64])], mu: usize) -> Vec<usize> {
    let (ranks, crowding) = rank_and_crowding(pool);
    let mut keep = select_from_ranked(pool, &ranks, &crowding, mu);
    keep.sort_by_key(|&i| pool[i].0);
    keep
}

fn sbx<R: Rng>(rng: &mut R, x1: &[f64], x2: &[f64], bounds: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = x1.to_vec();
    let mut c2 = x2.to_vec();
    if rng.random::<f64>() > P_C {
        return (c1, c2);
    }
    let exponent = 1.0 / (ETA_C + 1.0);
    for i in 0..x1.len() {
        if rng.random::<f64>() > 0.5 || (x1[i] - x2[i]).abs() <= 1e-14 {
            continue;
        }
        let (lo, hi) = bounds[i];
        let (y1, y2) = if x1[i] < x2[i] { (x1[i], x2[i]) } else { (x2[i], x1[i]) };
        let u = rng.random::<f64>();
        let spread = |beta: f64| {
            let alpha = 2.0 - pow(beta, -(ETA_C + 1.0));
            if u <= 1.0 / alpha {
                pow(u * alpha, exponent)
            } else {
                pow(1.0 / (2.0 - u * alpha), exponent)
            }
        };
        let bq = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        let a = (0.5 * ((y1 + y2) - bq * (y2 - y1))).clamp(lo, hi);
        let bq = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        let b = (0.5 * ((y1 + y2) + bq * (y2 - y1))).clamp(lo, hi);
        if rng.random::<bool>() {
            c1[i] = b;
            c2[i] = a;
        } else {
            c1[i] = a;
            c2[i] = b;
        }
    }
    (c1, c2)
}

fn polynomial_mutation<R: Rng>(rng: &mut R, x: &mut [f64], bounds: &[(f64, f64)]) {
    let p = 1.0 / x.len() as f64;
    let exponent = 1.0 / (ETA_M + 1.0);
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        if rng.random::<f64>() >= p {
            continue;
        }
        let width = hi - lo;
        let d1 = (*xi - lo) / width;
        let d2 = (hi - *xi) / width;
        let u = rng.random::<f64>();
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * pow(1.0 - d1, ETA_M + 1.0);
            pow(v, exponent) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * pow(1.0 - d2, ETA_M + 1.0);
            1.0 - pow(v, exponent)
        };
        *xi = (*xi + dq * width).clamp(lo, hi);
    }
}

fn uniform_crossover<R: Rng>(rng: &mut R, x1: &[bool], x2: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let mut c1 = x1.to_vec();
    let mut c2 = x2.to_vec();
    if rng.random::<f64>() <= P_C {
        for i in 0..c1.len() {
            if rng.random::<bool>() {
                core::mem::swap(&mut c1[i], &mut c2[i]);
            }
        }
    }
    (c1, c2)
}

fn bit_flip<R: Rng>(rng: &mut R, x: &mut [bool]) {
    let p = 1.0 / x.len() as f64;
    for b in x.iter_mut() {
        if rng.random::<f64>() < p {
            *b = !*b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn initialization_only() {
        let p = ProblemSpec::new("ZDT1").unwrap();
        let run: Vec<_> = Nsga2::new(&p, 10, 10, rng_from_seed(1)).unwrap().collect();
        assert_eq!(run.len(), 10);
        assert!(Nsga2::new(&p, 10, 9, rng_from_seed(1)).is_err());
        assert!(Nsga2::new(&p, 1, 9, rng_from_seed(1)).is_err());
    }

    #[test]
    fn deterministic_and_in_bounds() {
        let p = ProblemSpec::new("ZDT4").unwrap();
        let a: Vec<_> = Nsga2::new(&p, 10, 333, rng_from_seed(5)).unwrap().collect();
        let b: Vec<_> = Nsga2::new(&p, 10, 333, rng_from_seed(5)).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 333);
        for s in &a {
            let Some(Decision::Real(x)) = &s.decision else { panic!() };
            assert!((0.0..=1.0).contains(&x[0]));
            assert!(x[1..].iter().all(|v| (-5.0..=5.0).contains(v)));
        }
    }

    #[test]
    fn runs_on_bit_strings() {
        let p = ProblemSpec::new("ZDT5").unwrap();
        let run: Vec<_> = Nsga2::new(&p, 20, 200, rng_from_seed(2)).unwrap().collect();
        assert_eq!(run.len(), 200);
    }

    #[test]
    fn survivors_prefer_better_fronts_then_spread() {
        let pts: [&[f64]; 5] = [&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0], &[0.4, 0.6], &[1.0, 1.0]];
        let pool: Vec<(u64, &[f64])> = pts.iter().enumerate().map(|(i, p)| (i as u64 + 1, *p)).collect();
        let (ranks, _) = rank_and_crowding(&pool);
        assert_eq!(ranks, [0, 0, 0, 0, 1]);
        // the extremes are infinitely crowded; (0.4,0.6) sits in a tighter gap
        assert_eq!(select_survivors(&pool, 3), [0, 1, 2]);
        assert_eq!(select_survivors(&pool, 5), [0, 1, 2, 3, 4]);
    }

    #[test]
    fn converges_on_zdt1() {
        let p = ProblemSpec::new("ZDT1").unwrap();
        let mut algo = Nsga2::new(&p, 20, 4000, rng_from_seed(11)).unwrap();
        for _ in algo.by_ref() {}
        let best_f2 = algo
            .population()
            .iter()
            .map(|s| s.objectives[1])
            .fold(f64::INFINITY, f64::min);
        assert!(best_f2 < 1.0);
        assert_eq!(algo.population().len(), 20);
    }
}
