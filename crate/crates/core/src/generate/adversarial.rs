//! Phase adversary against a chosen online strategy.
//!
//! Each phase opens with `1/eps^2` jobs of size `eps * E` arriving together.
//! Once the target has packed them, every job except the first one placed in
//! each target server leaves after `delta`; the survivors stay `mu * delta`.
//! The target keeps one server per survivor for the whole phase, while an
//! offline packing stacks the survivors together and fills the short-lived
//! jobs tightly. Phase `i` starts at `i * mu * delta`, right as phase `i - 1`
//! ends.

use num_traits::One;
use serde::Serialize;

use crate::engine::simulate;
use crate::model::{Capacity, Job, JobSequence, Time};
use crate::strategy::StrategyConfig;
use crate::{Error, Rational, Result};

#[derive(Debug, Clone)]
pub struct AdversaryParams {
    /// Job size as a fraction of the capacity; `1/eps` must be an integer.
    pub eps: Rational,
    pub mu: u64,
    pub delta: u64,
    pub phases: u64,
    pub capacity: u64,
    /// Strategy whose packing decides the departures. Needed unless `mu == 1`.
    pub target: Option<StrategyConfig>,
}

#[derive(Debug, Clone)]
pub struct AdversarialInstance {
    pub sequence: JobSequence,
    /// Cost of the offline packing built alongside the sequence.
    pub offline_cost: Rational,
    pub params: AdversaryParams,
}

/// Sidecar metadata written next to an adversarial sequence file.
#[derive(Debug, Clone, Serialize)]
pub struct AdversarySidecar {
    pub offline_cost: f64,
    pub eps: f64,
    pub mu: u64,
    pub delta: u64,
    pub phases: u64,
}

impl AdversarialInstance {
    pub fn sidecar(&self) -> AdversarySidecar {
        AdversarySidecar {
            offline_cost: crate::rational_to_f64(&self.offline_cost),
            eps: crate::rational_to_f64(&self.params.eps),
            mu: self.params.mu,
            delta: self.params.delta,
            phases: self.params.phases,
        }
    }
}

/// `mu / (1 + eps (mu - 1))`, the ratio the construction forces.
pub fn lower_bound_ratio(eps: Rational, mu: u64) -> Rational {
    let mu = Rational::from_integer(mu as i128);
    mu / (Rational::one() + eps * (mu - Rational::one()))
}

pub fn gen_adversarial(params: &AdversaryParams) -> Result<AdversarialInstance> {
    let bad = |m: String| Err(Error::InvalidParams(m));
    let eps = params.eps;
    if eps <= Rational::from_integer(0) || eps > Rational::one() || !eps.recip().is_integer() {
        return bad(format!("1/eps must be a positive integer, eps = {eps}"));
    }
    let per_bin = eps.recip().to_integer() as u64;
    if !params.capacity.is_multiple_of(per_bin) {
        return bad(format!(
            "eps * E = {} is not an integer",
            eps * Rational::from_integer(params.capacity as i128)
        ));
    }
    if params.mu == 0 || params.delta == 0 || params.phases == 0 {
        return bad("mu, delta and phases must be at least 1".into());
    }
    if params.mu > 1 && params.target.is_none() {
        return bad("target strategy required for adaptive departures".into());
    }
    let capacity = Capacity::new(params.capacity)?;
    let size = params.capacity / per_bin;
    let batch = per_bin * per_bin;
    let short = params.delta;
    let long = params.mu * params.delta;

    let mut jobs: Vec<Job> = Vec::with_capacity((batch * params.phases) as usize);
    let mut offline: Time = 0;
    for phase in 0..params.phases {
        let start = phase * long;
        let first = jobs.len();
        jobs.extend((0..batch).map(|i| Job::new(first as u64 + i, size, start, start + long)));

        let survivors: Vec<usize> = match &params.target {
            Some(target) if params.mu > 1 => {
                // Placement at `start` never depends on the placeholder departures.
                let seq = JobSequence::new(jobs.clone(), capacity)?;
                let mut strategy = target.build(capacity)?;
                let run = simulate(&mut strategy, &seq)?;
                run.trace
                    .servers
                    .iter()
                    .filter_map(|s| s.jobs.iter().map(|&id| id as usize).find(|&id| id >= first))
                    .collect()
            }
            _ => Vec::new(),
        };
        for (pos, job) in jobs.iter_mut().enumerate().skip(first) {
            if !survivors.contains(&pos) {
                job.departure = start + short;
            }
        }

        let kept = survivors.len() as u64;
        offline += kept.div_ceil(per_bin) * long + (batch - kept).div_ceil(per_bin) * short;
    }

    Ok(AdversarialInstance {
        sequence: JobSequence::new(jobs, capacity)?,
        offline_cost: Rational::from_integer(offline as i128),
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_opt;

    fn params(
        eps: Rational,
        mu: u64,
        phases: u64,
        capacity: u64,
        target: Option<&str>,
    ) -> AdversaryParams {
        AdversaryParams {
            eps,
            mu,
            delta: 1,
            phases,
            capacity,
            target: target.map(|t| t.parse().unwrap()),
        }
    }

    #[test]
    fn half_eps_against_next_fit() {
        let inst = gen_adversarial(&params(Rational::new(1, 2), 3, 1, 10, Some("nf"))).unwrap();
        let jobs = inst.sequence.jobs();
        assert_eq!(jobs.len(), 4);
        assert!(jobs.iter().all(|j| j.size == 5 && j.arrival == 0));
        let deps: Vec<_> = jobs.iter().map(|j| j.departure).collect();
        assert_eq!(deps, vec![3, 1, 3, 1]);
        assert_eq!(inst.offline_cost, Rational::from_integer(4));
        assert_eq!(brute_force_opt(&inst.sequence).unwrap(), 4);

        let mut nf = inst
            .params
            .target
            .clone()
            .unwrap()
            .build(inst.sequence.capacity())
            .unwrap();
        let run = simulate(&mut nf, &inst.sequence).unwrap();
        assert_eq!(run.total_cost, 6);
        assert_eq!(
            Rational::new(6, 4),
            lower_bound_ratio(Rational::new(1, 2), 3)
        );
    }

    #[test]
    fn mu_one_needs_no_target() {
        let inst = gen_adversarial(&params(Rational::new(1, 2), 1, 2, 10, None)).unwrap();
        assert!(inst.sequence.jobs().iter().all(|j| j.length() == 1));
        assert_eq!(lower_bound_ratio(Rational::new(1, 2), 1), Rational::one());
        // two bins of two per phase
        assert_eq!(inst.offline_cost, Rational::from_integer(4));
    }

    #[test]
    fn offline_cost_matches_closed_form() {
        for target in ["nf", "ff", "bf", "mtf"] {
            let inst =
                gen_adversarial(&params(Rational::new(1, 10), 10, 5, 1000, Some(target))).unwrap();
            // (mu + 1/eps - 1) * delta per phase
            assert_eq!(
                inst.offline_cost,
                Rational::from_integer(5 * 19),
                "{target}"
            );
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(gen_adversarial(&params(Rational::new(2, 5), 3, 1, 10, Some("nf"))).is_err());
        assert!(gen_adversarial(&params(Rational::new(1, 3), 3, 1, 10, Some("nf"))).is_err());
        let err = gen_adversarial(&params(Rational::new(1, 2), 3, 1, 10, None)).unwrap_err();
        assert!(err.to_string().contains("target strategy required"));
    }
}
