use serde::{Deserialize, Serialize};

use super::rng::SeededRng;
use crate::model::{Capacity, Job, JobSequence};
use crate::{Error, Result};

/// Uniform random instances: sizes in `[min_size, max_size]` (default
/// `[1, E]`), arrivals in `[1, T - mu]`, lengths in `[1, mu]`, all
/// independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformParams {
    pub n: usize,
    pub capacity: u64,
    pub span_t: u64,
    pub mu: u64,
    pub seed: u64,
    pub min_size: u64,
    pub max_size: u64,
}

impl UniformParams {
    pub fn new(n: usize, capacity: u64, span_t: u64, mu: u64, seed: u64) -> Self {
        UniformParams {
            n,
            capacity,
            span_t,
            mu,
            seed,
            min_size: 1,
            max_size: capacity,
        }
    }

    pub fn with_sizes(mut self, min_size: u64, max_size: u64) -> Self {
        self.min_size = min_size;
        self.max_size = max_size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.capacity == 0 {
            return bad("capacity must be at least 1".into());
        }
        if self.mu == 0 || self.span_t <= self.mu {
            return bad(format!(
                "need T > mu >= 1, got T={} mu={}",
                self.span_t, self.mu
            ));
        }
        if self.min_size == 0 || self.min_size > self.max_size || self.max_size > self.capacity {
            return bad(format!(
                "size range [{}, {}] not within [1, {}]",
                self.min_size, self.max_size, self.capacity
            ));
        }
        Ok(())
    }
}

/// Draws size, arrival and length for each job in turn; job ids follow draw
/// order and the sequence is stably sorted by arrival.
pub fn gen_uniform(params: &UniformParams) -> Result<JobSequence> {
    params.validate()?;
    let mut rng = SeededRng::new(params.seed);
    let last_arrival = params.span_t - params.mu;
    let jobs = (0..params.n as u64)
        .map(|id| {
            let size = rng.range(params.min_size, params.max_size);
            let arrival = rng.range(1, last_arrival);
            let length = rng.range(1, params.mu);
            Job::new(id, size, arrival, arrival + length)
        })
        .collect();
    JobSequence::new(jobs, Capacity::new(params.capacity)?)
}
