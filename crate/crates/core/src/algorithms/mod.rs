//! Baseline optimizers used to generate archives: uniform random search and
//! a compact generational NSGA-II.
//!
//! Both are iterators over [`Solution`]s in evaluation order, so a logger can
//! observe them without knowing anything about their internals.

mod nsga2;

pub use nsga2::{rank_and_crowding, select_survivors, Nsga2, ETA_C, ETA_M, P_C};

use rand::Rng;

use crate::problems::ProblemSpec;
use crate::{Error, Result, Solution};

/// Independent uniform samples of the problem domain.
#[derive(Debug, Clone)]
pub struct RandomSearch<'a, R> {
    problem: &'a ProblemSpec,
    budget: u64,
    evaluated: u64,
    rng: R,
}

/// `budget` uniform samples of `problem`, numbered `1..=budget`.
pub fn random_search<R: Rng>(problem: &ProblemSpec, budget: u64, rng: R) -> Result<RandomSearch<'_, R>> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    Ok(RandomSearch {
        problem,
        budget,
        evaluated: 0,
        rng,
    })
}

impl<R: Rng> Iterator for RandomSearch<'_, R> {
    type Item = Solution;

    fn next(&mut self) -> Option<Solution> {
        if self.evaluated == self.budget {
            return None;
        }
        self.evaluated += 1;
        let x = self.problem.sample(&mut self.rng);
        let f = self
            .problem
            .evaluate(&x)
            .expect("samples lie inside the domain");
        Some(Solution::new(self.evaluated, f).with_decision(x))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.budget - self.evaluated) as usize;
        (left, Some(left))
    }
}

impl<R: Rng> ExactSizeIterator for RandomSearch<'_, R> {}
