//! Small fixed-capacity buffers kept sorted by `(dist, idx)`.
//!
//! Capacities here are `k` or `k + 1`, so a flat vector with insertion
//! shifting beats a heap.

/// An `(object index, distance)` pair ordered by distance, then index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighbor {
    pub idx: u32,
    pub dist: u32,
}

impl Neighbor {
    pub fn new(idx: u32, dist: u32) -> Self {
        Self { idx, dist }
    }

    #[inline]
    fn key(&self) -> (u32, u32) {
        (self.dist, self.idx)
    }
}

#[derive(Debug, Clone)]
pub struct BoundedBuffer {
    items: Vec<Neighbor>,
    capacity: usize,
}

impl BoundedBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            items: Vec::with_capacity(capacity),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() >= self.capacity
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    /// Distance of the last kept pair once the buffer is full.
    pub fn worst(&self) -> Option<u32> {
        if self.is_full() {
            self.items.last().map(|n| n.dist)
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[Neighbor] {
        &self.items
    }

    pub fn into_vec(self) -> Vec<Neighbor> {
        self.items
    }

    /// Inserts a pair whose index is known not to be present yet. Returns
    /// whether it was kept.
    pub fn push(&mut self, candidate: Neighbor) -> bool {
        if self.capacity == 0 {
            return false;
        }
        if self.is_full() {
            let last = *self.items.last().expect("full buffer is non-empty");
            if candidate.key() >= last.key() {
                return false;
            }
            self.items.pop();
        }
        let pos = self.items.partition_point(|n| n.key() < candidate.key());
        self.items.insert(pos, candidate);
        true
    }

    /// Inserts a pair, merging with an existing entry for the same index:
    /// an equal or better stored distance wins, otherwise the stored
    /// distance is lowered and the pair moves forward.
    pub fn push_unique(&mut self, candidate: Neighbor) -> bool {
        if let Some(pos) = self.items.iter().position(|n| n.idx == candidate.idx) {
            if self.items[pos].dist <= candidate.dist {
                return false;
            }
            let target = self.items[..pos].partition_point(|n| n.key() < candidate.key());
            self.items[target..=pos].rotate_right(1);
            self.items[target] = candidate;
            return true;
        }
        self.push(candidate)
    }
}
