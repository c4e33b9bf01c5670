//! Jobs, capacities and job sequences.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type JobId = u64;
pub type ServerId = usize;
/// Discrete time step.
pub type Time = u64;
/// Job size in capacity units.
pub type Size = u64;

/// A sized, timed demand occupying `[arrival, departure)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub size: Size,
    pub arrival: Time,
    pub departure: Time,
}

impl Job {
    pub fn new(id: JobId, size: Size, arrival: Time, departure: Time) -> Self {
        Job {
            id,
            size,
            arrival,
            departure,
        }
    }

    #[inline]
    pub fn length(&self) -> Time {
        self.departure - self.arrival
    }

    #[inline]
    pub fn is_active_at(&self, t: Time) -> bool {
        self.arrival <= t && t < self.departure
    }
}

/// Uniform server capacity `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Capacity(u64);

impl Capacity {
    pub fn new(units: u64) -> Result<Self> {
        if units == 0 {
            return Err(Error::ZeroCapacity);
        }
        Ok(Capacity(units))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

/// An input sequence: jobs ordered by arrival, ties kept in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct JobSequence {
    jobs: Vec<Job>,
    capacity: Capacity,
}

#[derive(Deserialize)]
struct RawSequence {
    jobs: Vec<Job>,
    capacity: Capacity,
}

impl TryFrom<RawSequence> for JobSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        JobSequence::new(raw.jobs, raw.capacity)
    }
}

impl JobSequence {
    /// Validates every job against the capacity and sorts stably by arrival.
    pub fn new(mut jobs: Vec<Job>, capacity: Capacity) -> Result<Self> {
        let mut seen = HashSet::with_capacity(jobs.len());
        for job in &jobs {
            if job.size == 0 || job.size > capacity.get() {
                return Err(Error::InvalidJob {
                    id: job.id,
                    reason: format!("size {} outside [1, {}]", job.size, capacity.get()),
                });
            }
            if job.departure <= job.arrival {
                return Err(Error::InvalidJob {
                    id: job.id,
                    reason: format!(
                        "departure {} not after arrival {}",
                        job.departure, job.arrival
                    ),
                });
            }
            if !seen.insert(job.id) {
                return Err(Error::DuplicateJob(job.id));
            }
        }
        jobs.sort_by_key(|j| j.arrival);
        Ok(JobSequence { jobs, capacity })
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn get(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    /// Jobs whose size satisfies `keep`, in sequence order.
    pub fn filter(&self, keep: impl Fn(&Job) -> bool) -> JobSequence {
        JobSequence {
            jobs: self.jobs.iter().copied().filter(|j| keep(j)).collect(),
            capacity: self.capacity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap(e: u64) -> Capacity {
        Capacity::new(e).unwrap()
    }

    #[test]
    fn rejects_bad_jobs() {
        assert!(matches!(
            JobSequence::new(vec![Job::new(0, 11, 0, 1)], cap(10)),
            Err(Error::InvalidJob { id: 0, .. })
        ));
        assert!(matches!(
            JobSequence::new(vec![Job::new(0, 0, 0, 1)], cap(10)),
            Err(Error::InvalidJob { .. })
        ));
        assert!(matches!(
            JobSequence::new(vec![Job::new(3, 1, 4, 4)], cap(10)),
            Err(Error::InvalidJob { id: 3, .. })
        ));
        assert!(matches!(
            JobSequence::new(vec![Job::new(1, 1, 0, 2), Job::new(1, 1, 0, 2)], cap(10)),
            Err(Error::DuplicateJob(1))
        ));
        assert!(matches!(Capacity::new(0), Err(Error::ZeroCapacity)));
    }

    #[test]
    fn sort_is_stable_on_equal_arrivals() {
        let seq = JobSequence::new(
            vec![
                Job::new(7, 1, 5, 6),
                Job::new(2, 1, 3, 9),
                Job::new(9, 1, 3, 4),
                Job::new(1, 1, 0, 4),
            ],
            cap(10),
        )
        .unwrap();
        let ids: Vec<_> = seq.jobs().iter().map(|j| j.id).collect();
        assert_eq!(ids, vec![1, 2, 9, 7]);
    }

    #[test]
    fn serde_rejects_invalid_sequences() {
        let bad = r#"{"jobs":[{"id":0,"size":20,"arrival":0,"departure":1}],"capacity":10}"#;
        assert!(serde_json::from_str::<JobSequence>(bad).is_err());
        let good = r#"{"jobs":[{"id":0,"size":2,"arrival":0,"departure":1}],"capacity":10}"#;
        assert_eq!(serde_json::from_str::<JobSequence>(good).unwrap().len(), 1);
    }
}
