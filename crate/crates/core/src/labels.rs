//! 2-hop hub labels built with Pruned Landmark Labeling.

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::hash::{Hash, Hasher};
use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexOrdering};

/// Distance value used for unreachable pairs.
pub const INFINITY: u32 = u32::MAX;

/// Largest distance a label entry can hold.
pub const MAX_LABEL_DISTANCE: u32 = u8::MAX as u32;

const LABEL_MAGIC: &[u8; 4] = b"RHUB";
const LABEL_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelEntry {
    pub hub: VertexId,
    pub dist: u8,
}

impl LabelEntry {
    pub fn new(hub: VertexId, dist: u8) -> Self {
        Self { hub, dist }
    }
}

/// Per-vertex hub labels, each sorted by hub id.
///
/// For undirected graphs the forward and backward labels coincide, so a
/// single label per vertex is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    offsets: Vec<usize>,
    entries: Vec<LabelEntry>,
    fingerprint: u64,
}

impl LabelSet {
    /// Assembles a label set from per-vertex labels, rejecting unsorted or
    /// out-of-range hubs.
    pub fn from_vertex_labels(labels: Vec<Vec<LabelEntry>>) -> Result<Self> {
        let n = labels.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries = Vec::with_capacity(labels.iter().map(Vec::len).sum());
        offsets.push(0);
        for (v, label) in labels.into_iter().enumerate() {
            check_label(v, &label, n)?;
            entries.extend(label);
            offsets.push(entries.len());
        }
        Ok(Self::from_parts(offsets, entries))
    }

    fn from_parts(offsets: Vec<usize>, entries: Vec<LabelEntry>) -> Self {
        let mut hasher = DefaultHasher::new();
        offsets.hash(&mut hasher);
        entries.hash(&mut hasher);
        let fingerprint = hasher.finish();
        Self {
            offsets,
            entries,
            fingerprint,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total number of (hub, distance) pairs, `|HL|`.
    pub fn total_pairs(&self) -> usize {
        self.entries.len()
    }

    pub fn average_label_size(&self) -> f64 {
        if self.vertex_count() == 0 {
            0.0
        } else {
            self.total_pairs() as f64 / self.vertex_count() as f64
        }
    }

    /// Label of `v`. Panics if `v` is out of range.
    pub fn label(&self, v: VertexId) -> &[LabelEntry] {
        let v = v as usize;
        &self.entries[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn checked_label(&self, v: VertexId) -> Result<&[LabelEntry]> {
        self.check_vertex(v)?;
        Ok(self.label(v))
    }

    pub(crate) fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v as u64,
                vertex_count: self.vertex_count(),
            })
        }
    }

    /// Content hash, used to tie derived indexes to the labels they were
    /// built from.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Shortest-path distance between `s` and `t`, or [`INFINITY`] if the
    /// labels share no hub.
    pub fn distance(&self, s: VertexId, t: VertexId) -> Result<u32> {
        self.check_vertex(s)?;
        self.check_vertex(t)?;
        Ok(label_distance(self.label(s), self.label(t)))
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(LABEL_MAGIC)?;
        out.write_all(&[LABEL_VERSION])?;
        out.write_all(&(self.vertex_count() as u64).to_le_bytes())?;
        for v in 0..self.vertex_count() as VertexId {
            let label = self.label(v);
            out.write_all(&(label.len() as u32).to_le_bytes())?;
            for entry in label {
                out.write_all(&entry.hub.to_le_bytes())?;
                out.write_all(&[entry.dist])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut input, &mut magic)?;
        if &magic != LABEL_MAGIC {
            return Err(Error::Format(format!("bad label file magic {magic:?}")));
        }
        let version = read_u8(&mut input)?;
        if version != LABEL_VERSION {
            return Err(Error::Format(format!("unsupported label file version {version}")));
        }
        let n = read_u64(&mut input)?;
        let n = usize::try_from(n)
            .ok()
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::Format(format!("vertex count {n} too large")))?;

        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for v in 0..n {
            let count = read_u32(&mut input)? as usize;
            let start = entries.len();
            for _ in 0..count {
                let hub = read_u32(&mut input)?;
                let dist = read_u8(&mut input)?;
                entries.push(LabelEntry { hub, dist });
            }
            check_label(v, &entries[start..], n)?;
            offsets.push(entries.len());
        }
        Ok(Self::from_parts(offsets, entries))
    }
}

fn check_label(v: usize, label: &[LabelEntry], n: usize) -> Result<()> {
    if let Some(bad) = label.iter().find(|e| e.hub as usize >= n) {
        return Err(Error::Format(format!(
            "label of vertex {v} names hub {} out of range",
            bad.hub
        )));
    }
    if label.windows(2).any(|w| w[0].hub >= w[1].hub) {
        return Err(Error::Format(format!(
            "label of vertex {v} is not strictly sorted by hub"
        )));
    }
    Ok(())
}

/// Merge sweep over two hub-sorted labels.
pub fn label_distance(a: &[LabelEntry], b: &[LabelEntry]) -> u32 {
    let (mut i, mut j) = (0, 0);
    let mut best = INFINITY;
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        match x.hub.cmp(&y.hub) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                best = best.min(x.dist as u32 + y.dist as u32);
                i += 1;
                j += 1;
            }
        }
    }
    best
}

/// Builds pruned landmark labels, processing landmarks in `ordering`.
///
/// Each landmark runs a BFS; a vertex whose distance is already certified
/// by the labels built so far is neither labeled nor expanded.
pub fn build_pll_labels(graph: &Graph, ordering: &VertexOrdering) -> Result<LabelSet> {
    let n = graph.vertex_count();
    if ordering.len() != n {
        return Err(Error::Config(format!(
            "ordering covers {} vertices but the graph has {n}",
            ordering.len()
        )));
    }

    let mut labels: Vec<Vec<LabelEntry>> = vec![Vec::new(); n];
    // Distances from the current root to each hub of its own label.
    let mut root_dist = vec![INFINITY; n];
    let mut depth = vec![INFINITY; n];
    let mut visited = Vec::new();
    let mut queue = VecDeque::new();

    for &root in ordering.order() {
        for e in &labels[root as usize] {
            root_dist[e.hub as usize] = e.dist as u32;
        }
        root_dist[root as usize] = 0;

        depth[root as usize] = 0;
        visited.push(root);
        queue.push_back(root);
        while let Some(w) = queue.pop_front() {
            let d = depth[w as usize];
            let certified = labels[w as usize].iter().any(|e| {
                let via = root_dist[e.hub as usize];
                via != INFINITY && via + e.dist as u32 <= d
            });
            if certified {
                continue;
            }
            if d > MAX_LABEL_DISTANCE {
                return Err(Error::DistanceOverflow {
                    depth: d,
                    max: MAX_LABEL_DISTANCE,
                });
            }
            labels[w as usize].push(LabelEntry::new(root, d as u8));
            for &x in graph.neighbors(w) {
                if depth[x as usize] == INFINITY {
                    depth[x as usize] = d + 1;
                    visited.push(x);
                    queue.push_back(x);
                }
            }
        }

        for v in visited.drain(..) {
            depth[v as usize] = INFINITY;
        }
        for e in &labels[root as usize] {
            root_dist[e.hub as usize] = INFINITY;
        }
    }

    for label in &mut labels {
        label.sort_unstable_by_key(|e| e.hub);
    }
    LabelSet::from_vertex_labels(labels)
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format("truncated file".into()),
        _ => Error::Io(e),
    })
}

pub(crate) fn read_u8<R: Read>(input: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(input, &mut b)?;
    Ok(b[0])
}

pub(crate) fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(input, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(input, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_magic<R: Read>(input: &mut R) -> Result<[u8; 4]> {
    let mut magic = [0u8; 4];
    read_exact(input, &mut magic)?;
    Ok(magic)
}
