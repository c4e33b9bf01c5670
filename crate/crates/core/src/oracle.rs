//! Exact offline optimum for tiny instances by exhaustive set partitioning.
//!
//! A partition of the jobs into groups is feasible when no group ever holds
//! more than `E` at once. Each group costs the measure of the union of its
//! job intervals: an offline server releases whenever it runs empty, and
//! renting again later costs the same as renting a fresh one.

use serde::Serialize;

use crate::model::{Job, JobId, JobSequence, Time};
use crate::stats::union_measure;
use crate::trace::StepOrder;
use crate::{Error, Result};

pub const DEFAULT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimalPacking {
    pub cost: Time,
    /// Job ids per server of one optimal packing.
    pub groups: Vec<Vec<JobId>>,
}

pub fn brute_force_opt(seq: &JobSequence) -> Result<Time> {
    brute_force_opt_with_limit(seq, DEFAULT_LIMIT).map(|p| p.cost)
}

pub fn brute_force_opt_with_limit(seq: &JobSequence, limit: usize) -> Result<OptimalPacking> {
    brute_force_opt_in(seq, limit, StepOrder::DeparturesFirst)
}

/// Exhaustive optimum under the given same-step ordering.
pub fn brute_force_opt_in(
    seq: &JobSequence,
    limit: usize,
    order: StepOrder,
) -> Result<OptimalPacking> {
    let jobs = seq.jobs();
    if jobs.len() > limit {
        return Err(Error::OracleTooLarge {
            jobs: jobs.len(),
            limit,
        });
    }
    let mut search = Search {
        jobs,
        capacity: seq.capacity().get(),
        order,
        groups: Vec::new(),
        best: None,
    };
    search.descend(0);
    Ok(search.best.unwrap_or(OptimalPacking {
        cost: 0,
        groups: Vec::new(),
    }))
}

struct Search<'a> {
    jobs: &'a [Job],
    capacity: u64,
    order: StepOrder,
    groups: Vec<Vec<Job>>,
    best: Option<OptimalPacking>,
}

impl Search<'_> {
    fn cost(&self) -> Time {
        self.groups.iter().map(|g| union_measure(g)).sum()
    }

    // Restricted growth enumeration: job i joins an existing group or starts
    // the next one, so every set partition is visited exactly once.
    fn descend(&mut self, i: usize) {
        // union measures only grow as jobs are added
        let partial = self.cost();
        if self.best.as_ref().is_some_and(|b| partial >= b.cost) {
            return;
        }
        if i == self.jobs.len() {
            self.best = Some(OptimalPacking {
                cost: partial,
                groups: self
                    .groups
                    .iter()
                    .map(|g| g.iter().map(|j| j.id).collect())
                    .collect(),
            });
            return;
        }
        let job = self.jobs[i];
        for g in 0..self.groups.len() {
            if fits(&self.groups[g], &job, self.capacity, self.order) {
                self.groups[g].push(job);
                self.descend(i + 1);
                self.groups[g].pop();
            }
        }
        self.groups.push(vec![job]);
        self.descend(i + 1);
        self.groups.pop();
    }
}

/// Load only rises at arrivals, so checking the job's own arrival and every
/// member arrival while the job is resident suffices.
fn fits(group: &[Job], job: &Job, capacity: u64, order: StepOrder) -> bool {
    std::iter::once(job.arrival)
        .chain(
            group
                .iter()
                .map(|m| m.arrival)
                .filter(|&t| order.resident_at_arrivals(job, t)),
        )
        .all(|t| {
            let load: u64 = group
                .iter()
                .filter(|m| order.resident_at_arrivals(m, t))
                .map(|m| m.size)
                .sum();
            load + job.size <= capacity
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Capacity;

    fn seq(jobs: &[(u64, u64, u64)], e: u64) -> JobSequence {
        let jobs = jobs
            .iter()
            .enumerate()
            .map(|(i, &(s, a, d))| Job::new(i as u64, s, a, d))
            .collect();
        JobSequence::new(jobs, Capacity::new(e).unwrap()).unwrap()
    }

    #[test]
    fn example_one_optimum() {
        let p =
            brute_force_opt_with_limit(&seq(&[(3, 1, 5), (4, 2, 6), (4, 3, 5)], 10), 8).unwrap();
        assert_eq!(p.cost, 7);
        assert_eq!(p.groups, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(brute_force_opt(&seq(&[(5, 2, 9)], 10)).unwrap(), 7);
        assert_eq!(
            brute_force_opt(&seq(&[(10, 0, 4), (10, 2, 7)], 10)).unwrap(),
            9
        );
        // a gap inside a group costs nothing extra
        assert_eq!(
            brute_force_opt(&seq(&[(10, 0, 2), (10, 5, 6)], 10)).unwrap(),
            3
        );
    }

    #[test]
    fn arrivals_first_separates_touching_jobs() {
        let q = seq(&[(6, 0, 2), (6, 2, 4)], 10);
        assert_eq!(
            brute_force_opt_in(&q, 8, StepOrder::DeparturesFirst)
                .unwrap()
                .cost,
            4
        );
        let p = brute_force_opt_in(&q, 8, StepOrder::ArrivalsFirst).unwrap();
        assert_eq!(p.cost, 4);
        assert_eq!(p.groups.len(), 2);
    }

    #[test]
    fn limit_is_enforced() {
        let q = seq(&[(1, 0, 1); 9], 10);
        let err = brute_force_opt(&q).unwrap_err();
        assert_eq!(
            err.to_string(),
            "instance too large for oracle: 9 jobs, limit 8"
        );
        assert!(brute_force_opt_with_limit(&q, 9).is_ok());
    }

    /// Counts set partitions to confirm the enumeration is exhaustive.
    #[test]
    fn enumerates_bell_many_partitions() {
        fn count(n: usize, groups: usize) -> usize {
            if n == 0 {
                return 1;
            }
            groups * count(n - 1, groups) + count(n - 1, groups + 1)
        }
        assert_eq!(count(8, 0), 4140);
        // all jobs disjoint and tiny: every partition is feasible, and the
        // optimum is simply the sum of lengths
        let q = seq(&[(1, 0, 1), (1, 2, 3), (1, 4, 5), (1, 6, 8)], 10);
        assert_eq!(brute_force_opt(&q).unwrap(), 5);
    }
}
