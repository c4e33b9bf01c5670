use super::{ArrivalView, Decision, Strategy};
use crate::model::{ServerId, Size};

/// Move To Front: scan from the front, place in the first server that fits,
/// then move that server to the front. Departures never reorder the list;
/// released servers simply drop out.
#[derive(Debug, Clone, Default)]
pub struct MoveToFront {
    label: String,
    list: Vec<ServerId>,
}

impl MoveToFront {
    pub fn new(label: impl Into<String>) -> Self {
        MoveToFront {
            label: label.into(),
            list: Vec::new(),
        }
    }
}

impl Strategy for MoveToFront {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn decide(&mut self, view: &ArrivalView<'_>) -> Decision {
        match self.list.iter().copied().find(|&id| view.fits(id)) {
            Some(id) => Decision::place_in(id),
            None => Decision::open_new(),
        }
    }

    fn placed(&mut self, server: ServerId, _size: Size, _opened: bool) {
        if let Some(pos) = self.list.iter().position(|&id| id == server) {
            self.list[..=pos].rotate_right(1);
        } else {
            self.list.insert(0, server);
        }
    }

    fn released(&mut self, server: ServerId) {
        self.list.retain(|&id| id != server);
    }

    fn ordered_bins(&self) -> Vec<ServerId> {
        self.list.clone()
    }

    fn reset(&mut self) {
        self.list.clear();
    }
}
