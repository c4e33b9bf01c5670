//! Sequence statistics that act as cost lower bounds and bound-formula inputs.

use serde::Serialize;

use crate::model::{Job, JobSequence, Time};
use crate::{Error, Rational, Result};

/// Aggregate quantities of a non-empty job sequence.
///
/// `util` and `total_size` are normalised by the capacity so that a job of
/// size `E` and length `l` contributes exactly `l` to `util`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceStats {
    /// Measure of the union of all `[arrival, departure)` intervals.
    pub span: Time,
    /// Sum of size times length, over `E`.
    #[serde(serialize_with = "crate::bounds::ser_rational")]
    pub util: Rational,
    /// Sum of sizes, over `E`.
    #[serde(serialize_with = "crate::bounds::ser_rational")]
    pub total_size: Rational,
    /// Sum of lengths.
    pub total_length: Time,
    /// Shortest job length.
    pub delta: Time,
    /// Longest job length (`mu * delta`).
    pub max_length: Time,
    /// Ratio of longest to shortest job length.
    #[serde(serialize_with = "crate::bounds::ser_rational")]
    pub mu: Rational,
}

pub fn compute_stats(seq: &JobSequence) -> Result<SequenceStats> {
    let jobs = seq.jobs();
    if jobs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let e = seq.capacity().get() as i128;

    let mut size_sum: i128 = 0;
    let mut area: i128 = 0;
    let mut total_length: Time = 0;
    let mut delta = Time::MAX;
    let mut max_length = 0;
    for job in jobs {
        let len = job.length();
        size_sum += job.size as i128;
        area += job.size as i128 * len as i128;
        total_length += len;
        delta = delta.min(len);
        max_length = max_length.max(len);
    }
    let span = segments(jobs).iter().map(|&(a, b)| b - a).sum();

    Ok(SequenceStats {
        span,
        util: Rational::new(area, e),
        total_size: Rational::new(size_sum, e),
        total_length,
        delta,
        max_length,
        mu: Rational::new(max_length as i128, delta as i128),
    })
}

/// Maximal intervals during which at least one job is active.
///
/// Touching intervals (`[a, b)` and `[b, c)`) merge into one segment, so the
/// result is the connected components of the active time set.
pub fn segments(jobs: &[Job]) -> Vec<(Time, Time)> {
    let mut intervals: Vec<(Time, Time)> = jobs.iter().map(|j| (j.arrival, j.departure)).collect();
    intervals.sort_unstable();
    let mut merged: Vec<(Time, Time)> = Vec::new();
    for (a, b) in intervals {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Measure of the union of the given jobs' intervals.
pub fn union_measure(jobs: &[Job]) -> Time {
    segments(jobs).iter().map(|&(a, b)| b - a).sum()
}
