//! Placement strategies and the interface the engine drives them through.
//!
//! A strategy sees an [`ArrivalView`] per arriving job: its id, size, arrival
//! step and the current levels of the servers still rented. Departure times
//! never reach a strategy. Level drops caused by departures arrive
//! separately through [`Strategy::level_changed`] and [`Strategy::released`].

mod best_fit;
mod classed;
mod move_to_front;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

pub use best_fit::BestFit;
pub use classed::{Classed, Classifier, FirstFitList, NextFitStream};
pub use move_to_front::MoveToFront;

use crate::model::{Capacity, JobId, ServerId, Size, Time};
use crate::{Error, Rational, Result};

/// Level bookkeeping for every server that has not been released.
#[derive(Debug, Default, Clone)]
pub struct ServerTable {
    slots: BTreeMap<ServerId, Slot>,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    level: Size,
    closed: bool,
}

/// What a strategy may know about one rented server.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerSummary {
    pub id: ServerId,
    pub level: Size,
    pub closed: bool,
}

impl ServerTable {
    pub(crate) fn open(&mut self, id: ServerId) {
        self.slots.insert(
            id,
            Slot {
                level: 0,
                closed: false,
            },
        );
    }

    pub(crate) fn add(&mut self, id: ServerId, size: Size) {
        self.slots.get_mut(&id).expect("server is rented").level += size;
    }

    /// Returns the new level.
    pub(crate) fn remove_load(&mut self, id: ServerId, size: Size) -> Size {
        let slot = self.slots.get_mut(&id).expect("server is rented");
        slot.level -= size;
        slot.level
    }

    pub(crate) fn close(&mut self, id: ServerId) {
        self.slots.get_mut(&id).expect("server is rented").closed = true;
    }

    pub(crate) fn release(&mut self, id: ServerId) {
        self.slots.remove(&id);
    }

    pub fn level(&self, id: ServerId) -> Option<Size> {
        self.slots.get(&id).map(|s| s.level)
    }

    pub fn is_rented(&self, id: ServerId) -> bool {
        self.slots.contains_key(&id)
    }

    pub fn is_closed(&self, id: ServerId) -> bool {
        self.slots.get(&id).is_some_and(|s| s.closed)
    }

    pub fn summaries(&self) -> impl Iterator<Item = ServerSummary> + '_ {
        self.slots.iter().map(|(&id, s)| ServerSummary {
            id,
            level: s.level,
            closed: s.closed,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Everything a strategy learns about an arriving job.
#[derive(Debug, Clone, Copy)]
pub struct ArrivalView<'a> {
    pub job: JobId,
    pub size: Size,
    pub arrival: Time,
    pub capacity: Capacity,
    servers: &'a ServerTable,
}

impl<'a> ArrivalView<'a> {
    pub(crate) fn new(
        job: JobId,
        size: Size,
        arrival: Time,
        capacity: Capacity,
        servers: &'a ServerTable,
    ) -> Self {
        ArrivalView {
            job,
            size,
            arrival,
            capacity,
            servers,
        }
    }

    pub fn level(&self, id: ServerId) -> Option<Size> {
        self.servers.level(id)
    }

    /// True if `id` is rented, not closed and has room for the arriving job.
    pub fn fits(&self, id: ServerId) -> bool {
        !self.servers.is_closed(id)
            && self
                .servers
                .level(id)
                .is_some_and(|l| l + self.size <= self.capacity.get())
    }

    pub fn servers(&self) -> impl Iterator<Item = ServerSummary> + 'a {
        self.servers.summaries()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Existing(ServerId),
    OpenNew,
}

/// A strategy's answer for one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub placement: Placement,
    /// Server to close before placing (Next Fit family only).
    pub close: Option<ServerId>,
}

impl Decision {
    pub fn place_in(id: ServerId) -> Self {
        Decision {
            placement: Placement::Existing(id),
            close: None,
        }
    }

    pub fn open_new() -> Self {
        Decision {
            placement: Placement::OpenNew,
            close: None,
        }
    }

    pub fn close_and_open(id: ServerId) -> Self {
        Decision {
            placement: Placement::OpenNew,
            close: Some(id),
        }
    }
}

/// An online placement rule.
pub trait Strategy: Send {
    /// Selection string this strategy was built from, e.g. `mnf:11`.
    fn label(&self) -> String;

    fn decide(&mut self, view: &ArrivalView<'_>) -> Decision;

    /// The engine applied the last decision: `size` went to `server`.
    fn placed(&mut self, server: ServerId, size: Size, opened: bool);

    /// A departure lowered the level of a server that is still rented.
    fn level_changed(&mut self, _server: ServerId, _level: Size) {}

    /// The last job of `server` departed.
    fn released(&mut self, server: ServerId);

    /// Servers the strategy may still place into, in scan order.
    fn ordered_bins(&self) -> Vec<ServerId>;

    /// Forget all run state.
    fn reset(&mut self);
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn label(&self) -> String {
        (**self).label()
    }
    fn decide(&mut self, view: &ArrivalView<'_>) -> Decision {
        (**self).decide(view)
    }
    fn placed(&mut self, server: ServerId, size: Size, opened: bool) {
        (**self).placed(server, size, opened)
    }
    fn level_changed(&mut self, server: ServerId, level: Size) {
        (**self).level_changed(server, level)
    }
    fn released(&mut self, server: ServerId) {
        (**self).released(server)
    }
    fn ordered_bins(&self) -> Vec<ServerId> {
        (**self).ordered_bins()
    }
    fn reset(&mut self) {
        (**self).reset()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    NextFit,
    ModifiedNextFit,
    FirstFit,
    ModifiedFirstFit,
    BestFit,
    Harmonic,
    MoveToFront,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::NextFit,
        StrategyKind::ModifiedNextFit,
        StrategyKind::FirstFit,
        StrategyKind::ModifiedFirstFit,
        StrategyKind::BestFit,
        StrategyKind::Harmonic,
        StrategyKind::MoveToFront,
    ];

    pub fn token(self) -> &'static str {
        match self {
            StrategyKind::NextFit => "nf",
            StrategyKind::ModifiedNextFit => "mnf",
            StrategyKind::FirstFit => "ff",
            StrategyKind::ModifiedFirstFit => "mff",
            StrategyKind::BestFit => "bf",
            StrategyKind::Harmonic => "harmonic",
            StrategyKind::MoveToFront => "mtf",
        }
    }

    pub fn takes_parameter(self) -> bool {
        matches!(
            self,
            StrategyKind::ModifiedNextFit | StrategyKind::ModifiedFirstFit | StrategyKind::Harmonic
        )
    }

    /// Any Fit strategies never open a server while a rented one fits.
    pub fn is_any_fit(self) -> bool {
        matches!(
            self,
            StrategyKind::FirstFit | StrategyKind::BestFit | StrategyKind::MoveToFront
        )
    }
}

/// A parsed strategy selection such as `ff`, `mnf:11` or `harmonic:10`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub param: Option<Rational>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, param: Option<Rational>) -> Result<Self> {
        let config = StrategyConfig { kind, param };
        config.check()?;
        Ok(config)
    }

    pub fn plain(kind: StrategyKind) -> Self {
        StrategyConfig { kind, param: None }
    }

    fn check(&self) -> Result<()> {
        let bad = || Err(Error::InvalidStrategy(self.to_string()));
        match (self.kind.takes_parameter(), &self.param) {
            (false, None) => Ok(()),
            (false, Some(_)) | (true, None) => bad(),
            (true, Some(k)) => {
                let ok = match self.kind {
                    StrategyKind::ModifiedNextFit => *k >= Rational::from_integer(2),
                    StrategyKind::ModifiedFirstFit => *k > Rational::zero(),
                    StrategyKind::Harmonic => k.is_integer() && *k >= Rational::one(),
                    _ => unreachable!(),
                };
                if ok {
                    Ok(())
                } else {
                    bad()
                }
            }
        }
    }

    pub fn build(&self, capacity: Capacity) -> Result<Box<dyn Strategy>> {
        self.check()?;
        let label = self.to_string();
        let k = self.param;
        Ok(match self.kind {
            StrategyKind::NextFit => {
                Box::new(Classed::<NextFitStream>::new(label, Classifier::Single))
            }
            StrategyKind::FirstFit => {
                Box::new(Classed::<FirstFitList>::new(label, Classifier::Single))
            }
            StrategyKind::ModifiedNextFit => Box::new(Classed::<NextFitStream>::new(
                label,
                Classifier::threshold(k.unwrap(), capacity),
            )),
            StrategyKind::ModifiedFirstFit => Box::new(Classed::<FirstFitList>::new(
                label,
                Classifier::threshold(k.unwrap(), capacity),
            )),
            StrategyKind::Harmonic => Box::new(Classed::<NextFitStream>::new(
                label,
                Classifier::harmonic(k.unwrap().to_integer() as u64, capacity),
            )),
            StrategyKind::BestFit => Box::new(BestFit::new(label, capacity)),
            StrategyKind::MoveToFront => Box::new(MoveToFront::new(label)),
        })
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.token())?;
        if let Some(k) = &self.param {
            write!(f, ":{}", format_rational(k))?;
        }
        Ok(())
    }
}

impl FromStr for StrategyConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let kind = StrategyKind::ALL
            .into_iter()
            .find(|k| k.token().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidStrategy(s.to_string()))?;
        let param = param
            .map(parse_rational)
            .transpose()
            .map_err(|_| Error::InvalidStrategy(s.to_string()))?;
        StrategyConfig::new(kind, param)
    }
}

/// Parses `11`, `8.5` or `17/2` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a rational number: '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| err())?;
        let d: i128 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(err());
    }
    let digits = format!("{int}{frac}");
    let numer: i128 = digits.parse().map_err(|_| err())?;
    let r = Rational::new(numer, 10i128.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
