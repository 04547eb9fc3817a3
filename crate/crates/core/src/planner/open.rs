//! OPEN as a bucket queue with one FIFO per rank.

use std::collections::VecDeque;

use super::Entry;

/// Pops entries in increasing `(rank, serial)` order. Serials are issued in
/// increasing order, so pushes almost always land at the back of a bucket.
#[derive(Default)]
pub(crate) struct OpenList {
    buckets: Vec<VecDeque<Entry>>,
    min: usize,
    len: usize,
}

impl OpenList {
    pub(crate) fn push(&mut self, e: Entry) {
        let r = e.rank() as usize;
        if r >= self.buckets.len() {
            self.buckets.resize_with(r + 1, VecDeque::new);
        }
        let b = &mut self.buckets[r];
        match b.back() {
            Some(last) if last.key > e.key => {
                let at = b.partition_point(|x| x.key < e.key);
                b.insert(at, e);
            }
            _ => b.push_back(e),
        }
        self.min = self.min.min(r);
        self.len += 1;
    }

    pub(crate) fn pop(&mut self) -> Option<Entry> {
        while self.min < self.buckets.len() {
            if let Some(e) = self.buckets[self.min].pop_front() {
                self.len -= 1;
                return Some(e);
            }
            // drained buckets give their memory back
            self.buckets[self.min] = VecDeque::new();
            self.min += 1;
        }
        None
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.len == 0
    }
}
