//! Simulation and analysis toolkit for the online server-renting problem.
//!
//! Jobs arrive over time and must be assigned to uniform-capacity servers
//! without knowing when they will depart. A server is rented from the moment
//! it receives its first job until every job placed in it has left, and the
//! objective is the total rental time over all servers.
//!
//! The crate is organised around a few pieces:
//!
//! * [`model`] and [`stats`]: jobs, sequences and the sequence statistics
//!   (span, utilization, total size, min length, max/min length ratio).
//! * [`engine`]: the deterministic event loop that drives a [`Strategy`].
//! * [`strategy`]: Next Fit, Modified Next Fit, First Fit, Modified First
//!   Fit, Best Fit, Harmonic and Move To Front.
//! * [`bounds`] and [`oracle`]: lower bounds, an exhaustive optimum for tiny
//!   instances, and exact checks of the known cost guarantees.
//! * [`generate`]: seeded uniform instances and the adaptive phase adversary.
//! * [`bench`]: strategy-by-instance experiment matrices.

pub mod bench;
pub mod bounds;
pub mod engine;
mod error;
pub mod generate;
pub mod io;
pub mod model;
pub mod oracle;
pub mod stats;
pub mod strategy;
pub mod trace;

pub use engine::{simulate, simulate_with, RunResult};
pub use error::{Error, Result};
pub use model::{Capacity, Job, JobId, JobSequence, ServerId, Size, Time};
pub use stats::{compute_stats, SequenceStats};
pub use strategy::{Strategy, StrategyConfig, StrategyKind};
pub use trace::{validate_trace, PlacementTrace, StepOrder};

/// Exact rational arithmetic used for every bound comparison.
pub type Rational = num_rational::Ratio<i128>;

/// Lossy conversion for reporting only; never used in comparisons.
pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
