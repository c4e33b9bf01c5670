//! Deterministic online simulation loop.
//!
//! Within a time step all departures (and the releases they trigger) are
//! handled before any arrival. Arrivals at the same step are handled in
//! sequence order, departures at the same step in sequence order too.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use crate::model::{JobSequence, ServerId, Time};
use crate::strategy::{ArrivalView, Placement, ServerTable, Strategy};
use crate::trace::{Event, EventKind, PlacementTrace, ServerRecord, StepOrder};
use crate::{Error, Result};

/// Per-server cost split: `stretch = first_period + closed_period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ServerStretch {
    pub id: ServerId,
    pub stretch: Time,
    pub first_period: Time,
    pub closed_period: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub strategy: String,
    pub total_cost: Time,
    pub trace: PlacementTrace,
    pub per_server: Vec<ServerStretch>,
    pub servers_opened: usize,
    /// Servers closed while still holding jobs.
    pub critical_count: usize,
}

/// Runs `strategy` over `seq` with departures handled first in each step.
///
/// The strategy is used as-is; call [`Strategy::reset`] first when reusing
/// an instance.
pub fn simulate<S: Strategy + ?Sized>(strategy: &mut S, seq: &JobSequence) -> Result<RunResult> {
    simulate_with(strategy, seq, StepOrder::DeparturesFirst)
}

pub fn simulate_with<S: Strategy + ?Sized>(
    strategy: &mut S,
    seq: &JobSequence,
    order: StepOrder,
) -> Result<RunResult> {
    let jobs = seq.jobs();
    let capacity = seq.capacity();
    let mut table = ServerTable::default();
    let mut servers: Vec<ServerRecord> = Vec::new();
    let mut assignments = BTreeMap::new();
    let mut events = Vec::with_capacity(jobs.len() * 4);
    let mut home: Vec<ServerId> = vec![0; jobs.len()];
    // (departure, position in sequence)
    let mut pending: BinaryHeap<Reverse<(Time, usize)>> = BinaryHeap::with_capacity(jobs.len());

    let depart_until = |limit: Option<Time>,
                        pending: &mut BinaryHeap<Reverse<(Time, usize)>>,
                        table: &mut ServerTable,
                        servers: &mut Vec<ServerRecord>,
                        events: &mut Vec<Event>,
                        home: &[ServerId],
                        strategy: &mut S| {
        while let Some(&Reverse((t, pos))) = pending.peek() {
            let due = match (limit, order) {
                (None, _) => true,
                (Some(l), StepOrder::DeparturesFirst) => t <= l,
                (Some(l), StepOrder::ArrivalsFirst) => t < l,
            };
            if !due {
                break;
            }
            pending.pop();
            let job = &jobs[pos];
            let server = home[pos];
            let level = table.remove_load(server, job.size);
            events.push(Event {
                time: t,
                kind: EventKind::Depart,
                job: Some(job.id),
                server: Some(server),
            });
            if level == 0 {
                table.release(server);
                servers[server].released_at = t;
                events.push(Event {
                    time: t,
                    kind: EventKind::Release,
                    job: None,
                    server: Some(server),
                });
                strategy.released(server);
            } else {
                strategy.level_changed(server, level);
            }
        }
    };

    for (pos, job) in jobs.iter().enumerate() {
        depart_until(
            Some(job.arrival),
            &mut pending,
            &mut table,
            &mut servers,
            &mut events,
            &home,
            strategy,
        );
        events.push(Event {
            time: job.arrival,
            kind: EventKind::Arrive,
            job: Some(job.id),
            server: None,
        });

        let view = ArrivalView::new(job.id, job.size, job.arrival, capacity, &table);
        let decision = strategy.decide(&view);
        let infeasible = |server: Option<ServerId>, reason: String| Error::InfeasiblePlacement {
            time: job.arrival,
            job: job.id,
            server,
            reason,
        };

        if let Some(c) = decision.close {
            if !table.is_rented(c) {
                return Err(infeasible(
                    Some(c),
                    format!("close of server {c} which is not rented"),
                ));
            }
            if table.is_closed(c) {
                return Err(infeasible(Some(c), format!("server {c} already closed")));
            }
            table.close(c);
            servers[c].closed_at = Some(job.arrival);
            events.push(Event {
                time: job.arrival,
                kind: EventKind::Close,
                job: None,
                server: Some(c),
            });
        }

        let (server, opened) = match decision.placement {
            Placement::Existing(id) => {
                let Some(level) = table.level(id) else {
                    return Err(infeasible(Some(id), format!("server {id} is not rented")));
                };
                if table.is_closed(id) {
                    return Err(infeasible(Some(id), format!("server {id} is closed")));
                }
                if level + job.size > capacity.get() {
                    return Err(infeasible(
                        Some(id),
                        format!(
                            "level {level} + size {} exceeds capacity {}",
                            job.size,
                            capacity.get()
                        ),
                    ));
                }
                (id, false)
            }
            Placement::OpenNew => {
                let id = servers.len();
                table.open(id);
                servers.push(ServerRecord {
                    id,
                    opened_at: job.arrival,
                    released_at: job.arrival,
                    closed_at: None,
                    jobs: Vec::new(),
                });
                (id, true)
            }
        };

        table.add(server, job.size);
        servers[server].jobs.push(job.id);
        home[pos] = server;
        assignments.insert(job.id, server);
        pending.push(Reverse((job.departure, pos)));
        events.push(Event {
            time: job.arrival,
            kind: EventKind::Place,
            job: Some(job.id),
            server: Some(server),
        });
        strategy.placed(server, job.size, opened);
    }
    depart_until(
        None,
        &mut pending,
        &mut table,
        &mut servers,
        &mut events,
        &home,
        strategy,
    );
    debug_assert!(table.is_empty());

    let per_server: Vec<ServerStretch> = servers
        .iter()
        .map(|s| ServerStretch {
            id: s.id,
            stretch: s.stretch(),
            first_period: s.first_period(),
            closed_period: s.closed_period(),
        })
        .collect();
    let total_cost = per_server.iter().map(|s| s.stretch).sum();
    let critical_count = per_server.iter().filter(|s| s.closed_period > 0).count();

    Ok(RunResult {
        strategy: strategy.label(),
        total_cost,
        servers_opened: servers.len(),
        critical_count,
        per_server,
        trace: PlacementTrace {
            sequence: seq.clone(),
            assignments,
            servers,
            events,
            step_order: order,
        },
    })
}

/// Clears all run state of `strategy`.
pub fn reset<S: Strategy + ?Sized>(strategy: &mut S) {
    strategy.reset();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Capacity, Job, Size};
    use crate::strategy::{Decision, StrategyConfig};
    use crate::trace::validate_trace;

    fn seq(jobs: &[(u64, u64, u64)], e: u64) -> JobSequence {
        let jobs = jobs
            .iter()
            .enumerate()
            .map(|(i, &(s, a, d))| Job::new(i as u64, s, a, d))
            .collect();
        JobSequence::new(jobs, Capacity::new(e).unwrap()).unwrap()
    }

    fn run(spec: &str, q: &JobSequence) -> RunResult {
        let mut s = spec
            .parse::<StrategyConfig>()
            .unwrap()
            .build(q.capacity())
            .unwrap();
        simulate(&mut s, q).unwrap()
    }

    #[test]
    fn next_fit_example_one() {
        let q = seq(&[(3, 1, 5), (4, 2, 6), (4, 3, 5)], 10);
        let r = run("nf", &q);
        assert_eq!(r.servers_opened, 2);
        assert_eq!(r.total_cost, 7);
        let s = &r.trace.servers;
        assert_eq!(s[0].jobs, vec![0, 1]);
        assert_eq!(
            (s[0].opened_at, s[0].closed_at, s[0].released_at),
            (1, Some(3), 6)
        );
        assert_eq!(s[1].jobs, vec![2]);
        assert_eq!(
            (s[1].opened_at, s[1].closed_at, s[1].released_at),
            (3, None, 5)
        );
        assert_eq!(r.critical_count, 1);
        assert_eq!(r.per_server[0].closed_period, 3);
        assert!(validate_trace(&r.trace).is_empty());
    }

    #[test]
    fn single_job_costs_its_length() {
        for spec in ["nf", "mnf:2", "ff", "mff:7", "bf", "harmonic:10", "mtf"] {
            let r = run(spec, &seq(&[(4, 3, 12)], 10));
            assert_eq!((r.servers_opened, r.total_cost), (1, 9), "{spec}");
        }
    }

    #[test]
    fn event_log_orders_departures_first() {
        let q = seq(&[(6, 0, 2), (6, 2, 4)], 10);
        let r = run("ff", &q);
        let kinds: Vec<_> = r.trace.events.iter().map(|e| (e.time, e.kind)).collect();
        use EventKind::*;
        assert_eq!(
            kinds,
            vec![
                (0, Arrive),
                (0, Place),
                (2, Depart),
                (2, Release),
                (2, Arrive),
                (2, Place),
                (4, Depart),
                (4, Release)
            ]
        );
        // server 0 is never reused after release
        assert_eq!(r.trace.assignments[&1], 1);
        assert_eq!(r.total_cost, 4);
    }

    #[test]
    fn arrivals_first_keeps_departing_jobs_resident() {
        let q = seq(&[(6, 0, 2), (3, 2, 4), (6, 2, 4)], 10);
        let r = simulate_with(
            &mut "ff"
                .parse::<StrategyConfig>()
                .unwrap()
                .build(q.capacity())
                .unwrap(),
            &q,
            StepOrder::ArrivalsFirst,
        )
        .unwrap();
        // job 1 joins server 0 before job 0 leaves; job 2 no longer fits there
        assert_eq!(r.trace.assignments[&1], 0);
        assert_eq!(r.trace.assignments[&2], 1);
        assert_eq!(r.total_cost, 4 + 2);
        assert!(validate_trace(&r.trace).is_empty());
        use EventKind::*;
        let at_two: Vec<_> = r
            .trace
            .events
            .iter()
            .filter(|e| e.time == 2)
            .map(|e| e.kind)
            .collect();
        assert_eq!(at_two, vec![Arrive, Place, Arrive, Place, Depart]);
    }

    struct Rogue(Decision);
    impl Strategy for Rogue {
        fn label(&self) -> String {
            "rogue".into()
        }
        fn decide(&mut self, _: &ArrivalView<'_>) -> Decision {
            self.0
        }
        fn placed(&mut self, _: ServerId, _: Size, _: bool) {}
        fn released(&mut self, _: ServerId) {}
        fn ordered_bins(&self) -> Vec<ServerId> {
            vec![]
        }
        fn reset(&mut self) {}
    }

    #[test]
    fn infeasible_decisions_are_errors() {
        let q = seq(&[(6, 0, 5), (6, 1, 5)], 10);
        let err = simulate(&mut Rogue(Decision::place_in(0)), &q).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasiblePlacement {
                time: 0,
                job: 0,
                ..
            }
        ));
        assert!(err.to_string().contains("infeasible placement"));

        // job 1 overflows server 0
        struct Greedy;
        impl Strategy for Greedy {
            fn label(&self) -> String {
                "greedy".into()
            }
            fn decide(&mut self, v: &ArrivalView<'_>) -> Decision {
                if v.level(0).is_some() {
                    Decision::place_in(0)
                } else {
                    Decision::open_new()
                }
            }
            fn placed(&mut self, _: ServerId, _: Size, _: bool) {}
            fn released(&mut self, _: ServerId) {}
            fn ordered_bins(&self) -> Vec<ServerId> {
                vec![]
            }
            fn reset(&mut self) {}
        }
        let err = simulate(&mut Greedy, &q).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasiblePlacement {
                time: 1,
                job: 1,
                server: Some(0),
                ..
            }
        ));

        let err = simulate(&mut Rogue(Decision::close_and_open(3)), &q).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasiblePlacement {
                server: Some(3),
                ..
            }
        ));
    }

    #[test]
    fn reset_reproduces_runs() {
        let a = seq(&[(3, 0, 9), (8, 1, 3), (2, 2, 7), (5, 2, 4), (7, 5, 8)], 10);
        let b = seq(&[(9, 0, 2), (1, 0, 5), (4, 1, 6)], 10);
        for spec in ["nf", "mnf:3", "ff", "mff:3", "bf", "harmonic:3", "mtf"] {
            let config: StrategyConfig = spec.parse().unwrap();
            let mut s = config.build(a.capacity()).unwrap();
            reset(&mut s); // no-op on a fresh instance
            let first = simulate(&mut s, &a).unwrap();
            reset(&mut s);
            let on_b = simulate(&mut s, &b).unwrap();
            reset(&mut s);
            let again = simulate(&mut s, &a).unwrap();
            assert_eq!(first, again, "{spec}");
            let fresh_b = simulate(&mut config.build(b.capacity()).unwrap(), &b).unwrap();
            assert_eq!(on_b, fresh_b, "{spec}");
        }
    }
}
