//! Size-classified strategies: each class runs an independent stream.
//!
//! Next Fit and First Fit are the single-class case. Modified Next Fit and
//! Modified First Fit split at `E/K`, Harmonic uses the harmonic intervals
//! `(E/(i+1), E/i]`.

use std::collections::BTreeSet;

use super::{ArrivalView, Decision, Strategy};
use crate::model::{Capacity, ServerId, Size};
use crate::Rational;

/// Maps a job size to a stream index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classifier {
    Single,
    /// Class 0 holds sizes strictly below `E/K`, class 1 the rest.
    Threshold {
        numer: u128,
        denom: u128,
        capacity: u64,
    },
    /// Class `i - 1` holds sizes in `(E/(i+1), E/i]`; the last class holds all `s <= E/K`.
    Harmonic {
        classes: u64,
        capacity: u64,
    },
}

impl Classifier {
    pub fn threshold(k: Rational, capacity: Capacity) -> Self {
        Classifier::Threshold {
            numer: *k.numer() as u128,
            denom: *k.denom() as u128,
            capacity: capacity.get(),
        }
    }

    pub fn harmonic(classes: u64, capacity: Capacity) -> Self {
        Classifier::Harmonic {
            classes: classes.max(1),
            capacity: capacity.get(),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Classifier::Single => 1,
            Classifier::Threshold { .. } => 2,
            Classifier::Harmonic { classes, .. } => *classes as usize,
        }
    }

    pub fn class_of(&self, size: Size) -> usize {
        match *self {
            Classifier::Single => 0,
            // size < E * denom / numer, cross-multiplied
            Classifier::Threshold {
                numer,
                denom,
                capacity,
            } => {
                if (size as u128) * numer < (capacity as u128) * denom {
                    0
                } else {
                    1
                }
            }
            // s in (E/(i+1), E/i]  <=>  floor(E/s) == i
            Classifier::Harmonic { classes, capacity } => {
                ((capacity / size.max(1)).clamp(1, classes) - 1) as usize
            }
        }
    }
}

/// One independent packing stream inside a classified strategy.
pub trait Stream: Default + Send {
    fn decide(&self, view: &ArrivalView<'_>) -> Decision;
    fn placed(&mut self, server: ServerId, opened: bool);
    /// Returns true if the stream owned `server`.
    fn released(&mut self, server: ServerId) -> bool;
    fn bins(&self) -> Vec<ServerId>;
}

/// Next Fit: a single server receives items until one does not fit, at
/// which point it is closed and a fresh server is opened.
#[derive(Debug, Default, Clone)]
pub struct NextFitStream {
    current: Option<ServerId>,
}

impl NextFitStream {
    pub fn current(&self) -> Option<ServerId> {
        self.current
    }
}

impl Stream for NextFitStream {
    fn decide(&self, view: &ArrivalView<'_>) -> Decision {
        match self.current {
            Some(id) if view.fits(id) => Decision::place_in(id),
            Some(id) => Decision::close_and_open(id),
            None => Decision::open_new(),
        }
    }

    fn placed(&mut self, server: ServerId, opened: bool) {
        if opened {
            self.current = Some(server);
        }
    }

    fn released(&mut self, server: ServerId) -> bool {
        if self.current == Some(server) {
            self.current = None;
            return true;
        }
        false
    }

    fn bins(&self) -> Vec<ServerId> {
        self.current.into_iter().collect()
    }
}

/// First Fit: scan rented servers in opening order.
#[derive(Debug, Default, Clone)]
pub struct FirstFitList {
    // server ids grow with opening time
    open: BTreeSet<ServerId>,
}

impl Stream for FirstFitList {
    fn decide(&self, view: &ArrivalView<'_>) -> Decision {
        match self.open.iter().copied().find(|&id| view.fits(id)) {
            Some(id) => Decision::place_in(id),
            None => Decision::open_new(),
        }
    }

    fn placed(&mut self, server: ServerId, opened: bool) {
        if opened {
            self.open.insert(server);
        }
    }

    fn released(&mut self, server: ServerId) -> bool {
        self.open.remove(&server)
    }

    fn bins(&self) -> Vec<ServerId> {
        self.open.iter().copied().collect()
    }
}

/// A strategy that routes each size class to its own stream.
#[derive(Debug, Clone)]
pub struct Classed<S> {
    label: String,
    classifier: Classifier,
    streams: Vec<S>,
}

impl<S: Stream> Classed<S> {
    pub fn new(label: impl Into<String>, classifier: Classifier) -> Self {
        let streams = (0..classifier.classes()).map(|_| S::default()).collect();
        Classed {
            label: label.into(),
            classifier,
            streams,
        }
    }

    pub fn streams(&self) -> &[S] {
        &self.streams
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }
}

impl<S: Stream> Strategy for Classed<S> {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn decide(&mut self, view: &ArrivalView<'_>) -> Decision {
        self.streams[self.classifier.class_of(view.size)].decide(view)
    }

    fn placed(&mut self, server: ServerId, size: Size, opened: bool) {
        let class = self.classifier.class_of(size);
        self.streams[class].placed(server, opened);
    }

    fn released(&mut self, server: ServerId) {
        for stream in &mut self.streams {
            if stream.released(server) {
                break;
            }
        }
    }

    fn ordered_bins(&self) -> Vec<ServerId> {
        self.streams.iter().flat_map(Stream::bins).collect()
    }

    fn reset(&mut self) {
        self.streams.iter_mut().for_each(|s| *s = S::default());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap(e: u64) -> Capacity {
        Capacity::new(e).unwrap()
    }

    #[test]
    fn harmonic_classes() {
        let c = Classifier::harmonic(10, cap(1000));
        assert_eq!(c.class_of(600), 0);
        assert_eq!(c.class_of(1000), 0);
        assert_eq!(c.class_of(501), 0);
        assert_eq!(c.class_of(500), 1);
        assert_eq!(c.class_of(450), 1);
        assert_eq!(c.class_of(90), 9);
        assert_eq!(c.class_of(1), 9);
        // K = 1 collapses everything into one class
        let single = Classifier::harmonic(1, cap(10));
        assert!((1..=10).all(|s| single.class_of(s) == 0));
    }

    #[test]
    fn threshold_is_strict_and_exact() {
        let c = Classifier::threshold(Rational::from_integer(3), cap(10));
        assert_eq!(c.class_of(3), 0);
        assert_eq!(c.class_of(4), 1);
        let c = Classifier::threshold(Rational::from_integer(2), cap(10));
        assert_eq!(c.class_of(4), 0);
        assert_eq!(c.class_of(5), 1);
        assert_eq!(c.class_of(7), 1);
        let c = Classifier::threshold(Rational::new(17, 2), cap(17));
        assert_eq!(c.class_of(1), 0);
        assert_eq!(c.class_of(2), 1);
    }

    /// Harmonic classes agree with a direct rational interval test.
    #[test]
    fn harmonic_matches_interval_definition() {
        for e in [7u64, 10, 12, 100, 1000] {
            for k in 1..=12u64 {
                let c = Classifier::harmonic(k, cap(e));
                for s in 1..=e {
                    let sz = Rational::from_integer(s as i128);
                    let ee = Rational::from_integer(e as i128);
                    let expected = (1..k)
                        .find(|&i| {
                            sz > ee / Rational::from_integer(i as i128 + 1)
                                && sz <= ee / Rational::from_integer(i as i128)
                        })
                        .unwrap_or(k);
                    assert_eq!(c.class_of(s) as u64 + 1, expected, "e={e} k={k} s={s}");
                }
            }
        }
    }
}
