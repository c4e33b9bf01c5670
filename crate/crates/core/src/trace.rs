//! Placement traces and their validation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Job, JobId, JobSequence, ServerId, Time};
use crate::stats::segments;

/// One rented server over its whole lifetime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerRecord {
    pub id: ServerId,
    pub opened_at: Time,
    /// Step at which the last resident job departed.
    pub released_at: Time,
    /// Step at which a Next Fit style strategy stopped placing into it.
    pub closed_at: Option<Time>,
    /// Resident jobs in placement order. Residency over time follows from
    /// each job's own interval.
    pub jobs: Vec<JobId>,
}

impl ServerRecord {
    pub fn stretch(&self) -> Time {
        self.released_at.saturating_sub(self.opened_at)
    }

    /// Time from opening until closed (or released, if never closed).
    pub fn first_period(&self) -> Time {
        let end = self
            .closed_at
            .map_or(self.released_at, |c| c.min(self.released_at));
        end.saturating_sub(self.opened_at)
    }

    /// Time from closing until release; zero for servers never closed.
    pub fn closed_period(&self) -> Time {
        self.stretch() - self.first_period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Arrive,
    Place,
    Close,
    Depart,
    Release,
}

impl EventKind {
    fn is_departure(self) -> bool {
        matches!(self, EventKind::Depart | EventKind::Release)
    }
}

/// How departures and arrivals that share a time step are ordered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepOrder {
    /// Jobs departing at `t` free their capacity before jobs arriving at `t`
    /// are placed. Occupancy is `[arrival, departure)`.
    #[default]
    DeparturesFirst,
    /// Jobs arriving at `t` are placed while jobs departing at `t` are still
    /// resident. Occupancy is `[arrival, departure]` for capacity purposes;
    /// rental time is unchanged.
    ArrivalsFirst,
}

impl StepOrder {
    /// Rank of an event kind within one time step.
    pub fn rank(self, kind: EventKind) -> u8 {
        match self {
            StepOrder::DeparturesFirst => u8::from(!kind.is_departure()),
            StepOrder::ArrivalsFirst => u8::from(kind.is_departure()),
        }
    }

    /// Whether `a` and `b` compete for capacity at some instant.
    pub fn overlaps(self, a: &Job, b: &Job) -> bool {
        match self {
            StepOrder::DeparturesFirst => a.arrival < b.departure && b.arrival < a.departure,
            StepOrder::ArrivalsFirst => a.arrival <= b.departure && b.arrival <= a.departure,
        }
    }

    /// Whether `job` holds capacity when arrivals at `t` are placed.
    pub fn resident_at_arrivals(self, job: &Job, t: Time) -> bool {
        match self {
            StepOrder::DeparturesFirst => job.arrival <= t && t < job.departure,
            StepOrder::ArrivalsFirst => job.arrival <= t && t <= job.departure,
        }
    }
}

impl fmt::Display for StepOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepOrder::DeparturesFirst => "departures-first",
            StepOrder::ArrivalsFirst => "arrivals-first",
        })
    }
}

impl std::str::FromStr for StepOrder {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "departures-first" => Ok(StepOrder::DeparturesFirst),
            "arrivals-first" => Ok(StepOrder::ArrivalsFirst),
            other => Err(crate::Error::Parse(format!("unknown step order '{other}'"))),
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Arrive => "arrive",
            EventKind::Place => "place",
            EventKind::Close => "close",
            EventKind::Depart => "depart",
            EventKind::Release => "release",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub time: Time,
    pub kind: EventKind,
    pub job: Option<JobId>,
    pub server: Option<ServerId>,
}

impl Event {
    /// `t,kind,job_id,server_id` with empty fields for absent ids.
    pub fn to_log_line(&self) -> String {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{}",
            self.time,
            self.kind,
            opt(self.job),
            opt(self.server.map(|s| s as u64))
        )
    }
}

/// Full assignment history of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementTrace {
    pub sequence: JobSequence,
    pub assignments: BTreeMap<JobId, ServerId>,
    pub servers: Vec<ServerRecord>,
    pub events: Vec<Event>,
    #[serde(default)]
    pub step_order: StepOrder,
}

impl PlacementTrace {
    pub fn total_cost(&self) -> Time {
        self.servers.iter().map(ServerRecord::stretch).sum()
    }

    pub fn event_log(&self) -> String {
        let mut out = String::from("t,kind,job_id,server_id\n");
        for e in &self.events {
            out.push_str(&e.to_log_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Job missing from the assignment map or from its server's job list.
    Assignment,
    /// Resident sizes exceed the capacity.
    Capacity,
    /// `released_at` differs from the last departure.
    Release,
    /// `opened_at` differs from the first arrival.
    Open,
    /// The server sat empty for a while without being released.
    Gap,
    /// A job was placed after the server was closed (same-step placements
    /// are ordered by the event log).
    ClosedPlacement,
    /// Event log out of time order or out of phase order within a step.
    EventOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub time: Option<Time>,
    pub job: Option<JobId>,
    pub server: Option<ServerId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(t) = self.time {
            write!(f, " t={t}")?;
        }
        if let Some(s) = self.server {
            write!(f, " server={s}")?;
        }
        if let Some(j) = self.job {
            write!(f, " job={j}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Checks every server and trace invariant; an empty list means the trace is sound.
pub fn validate_trace(trace: &PlacementTrace) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, time, job, server, detail: String| {
        out.push(Violation {
            kind,
            time,
            job,
            server,
            detail,
        })
    };

    let jobs: BTreeMap<JobId, &Job> = trace.sequence.jobs().iter().map(|j| (j.id, j)).collect();
    let capacity = trace.sequence.capacity().get();

    // Where each job actually appears.
    let mut listed: BTreeMap<JobId, Vec<ServerId>> = BTreeMap::new();
    for server in &trace.servers {
        for &id in &server.jobs {
            listed.entry(id).or_default().push(server.id);
        }
    }
    for &id in jobs.keys() {
        let assigned = trace.assignments.get(&id).copied();
        let homes = listed.get(&id).map(Vec::as_slice).unwrap_or(&[]);
        match (assigned, homes) {
            (None, _) => push(
                ViolationKind::Assignment,
                None,
                Some(id),
                None,
                "job not assigned".into(),
            ),
            (Some(s), [h]) if *h == s => {}
            (Some(s), _) => push(
                ViolationKind::Assignment,
                None,
                Some(id),
                Some(s),
                format!("assigned to server {s} but listed in {homes:?}"),
            ),
        }
    }
    for (&id, servers) in &listed {
        if !jobs.contains_key(&id) {
            push(
                ViolationKind::Assignment,
                None,
                Some(id),
                servers.first().copied(),
                "unknown job in server".into(),
            );
        }
    }

    for server in &trace.servers {
        let resident: Vec<Job> = server
            .jobs
            .iter()
            .filter_map(|id| jobs.get(id).map(|j| **j))
            .collect();
        if resident.is_empty() {
            push(
                ViolationKind::Assignment,
                None,
                None,
                Some(server.id),
                "server holds no jobs".into(),
            );
            continue;
        }
        let first = resident.iter().map(|j| j.arrival).min().unwrap();
        let last = resident.iter().map(|j| j.departure).max().unwrap();
        if server.opened_at != first {
            push(
                ViolationKind::Open,
                Some(server.opened_at),
                None,
                Some(server.id),
                format!(
                    "opened at {} but first job arrives at {first}",
                    server.opened_at
                ),
            );
        }
        if server.released_at != last {
            push(
                ViolationKind::Release,
                Some(server.released_at),
                None,
                Some(server.id),
                format!(
                    "released at {} but last job departs at {last}",
                    server.released_at
                ),
            );
        }
        let parts = segments(&resident);
        for pair in parts.windows(2) {
            push(
                ViolationKind::Gap,
                Some(pair[0].1),
                None,
                Some(server.id),
                format!(
                    "empty during [{}, {}) without release",
                    pair[0].1, pair[1].0
                ),
            );
        }
        if let Some(closed) = server.closed_at {
            // Within the closing step, only placements logged after the close count.
            let position = |kind: EventKind, job: Option<JobId>| {
                trace.events.iter().position(|e| {
                    e.kind == kind && e.server == Some(server.id) && (job.is_none() || e.job == job)
                })
            };
            let close_pos = position(EventKind::Close, None);
            let after_close = |j: &Job| {
                j.arrival > closed
                    || (j.arrival == closed
                        && matches!((close_pos, position(EventKind::Place, Some(j.id))), (Some(c), Some(p)) if p > c))
            };
            for job in resident.iter().filter(|j| after_close(j)) {
                push(
                    ViolationKind::ClosedPlacement,
                    Some(job.arrival),
                    Some(job.id),
                    Some(server.id),
                    format!("placed after close at {closed}"),
                );
            }
        }

        // Load sweep in processing order; the load after each change is a
        // state the server really passes through.
        let order = trace.step_order;
        let mut deltas: Vec<(Time, u8, i64)> = Vec::with_capacity(resident.len() * 2);
        for j in &resident {
            deltas.push((j.arrival, order.rank(EventKind::Arrive), j.size as i64));
            deltas.push((j.departure, order.rank(EventKind::Depart), -(j.size as i64)));
        }
        deltas.sort_unstable();
        let mut load = 0i64;
        let mut over = false;
        for (t, _, change) in deltas {
            load += change;
            if load > capacity as i64 {
                if !over {
                    push(
                        ViolationKind::Capacity,
                        Some(t),
                        None,
                        Some(server.id),
                        format!("load {load} exceeds capacity {capacity}"),
                    );
                }
                over = true;
            } else {
                over = false;
            }
        }
    }

    for pair in trace.events.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let order = trace.step_order;
        if b.time < a.time || (b.time == a.time && order.rank(b.kind) < order.rank(a.kind)) {
            push(
                ViolationKind::EventOrder,
                Some(b.time),
                b.job,
                b.server,
                format!("{} event after {} at t={}", b.kind, a.kind, a.time),
            );
        }
    }

    out
}
