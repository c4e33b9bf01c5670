use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use super::{ArrivalView, Decision, Strategy};
use crate::model::{Capacity, ServerId, Size};

/// Best Fit: the fullest server that still fits the item, ties to the
/// earliest opened. Levels are tracked through departures, so the order
/// shifts when jobs leave.
#[derive(Debug, Clone)]
pub struct BestFit {
    label: String,
    capacity: u64,
    levels: HashMap<ServerId, Size>,
    order: BTreeSet<(Reverse<Size>, ServerId)>,
}

impl BestFit {
    pub fn new(label: impl Into<String>, capacity: Capacity) -> Self {
        BestFit {
            label: label.into(),
            capacity: capacity.get(),
            levels: HashMap::new(),
            order: BTreeSet::new(),
        }
    }

    fn set_level(&mut self, server: ServerId, level: Size) {
        if let Some(old) = self.levels.insert(server, level) {
            self.order.remove(&(Reverse(old), server));
        }
        self.order.insert((Reverse(level), server));
    }
}

impl Strategy for BestFit {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn decide(&mut self, view: &ArrivalView<'_>) -> Decision {
        let Some(room) = self.capacity.checked_sub(view.size) else {
            return Decision::open_new();
        };
        // first entry with level <= room: highest such level, lowest id on ties
        match self.order.range((Reverse(room), 0)..).next() {
            Some(&(_, id)) => {
                debug_assert!(view.fits(id));
                Decision::place_in(id)
            }
            None => Decision::open_new(),
        }
    }

    fn placed(&mut self, server: ServerId, size: Size, _opened: bool) {
        let level = self.levels.get(&server).copied().unwrap_or(0) + size;
        self.set_level(server, level);
    }

    fn level_changed(&mut self, server: ServerId, level: Size) {
        self.set_level(server, level);
    }

    fn released(&mut self, server: ServerId) {
        if let Some(old) = self.levels.remove(&server) {
            self.order.remove(&(Reverse(old), server));
        }
    }

    fn ordered_bins(&self) -> Vec<ServerId> {
        self.order.iter().map(|&(_, id)| id).collect()
    }

    fn reset(&mut self) {
        self.levels.clear();
        self.order.clear();
    }
}
