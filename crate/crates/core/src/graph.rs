//! Undirected, unweighted graphs in compressed adjacency form.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense vertex identifier in `[0, vertex_count)`.
pub type VertexId = u32;

/// An immutable undirected graph.
///
/// Neighbor lists are sorted, symmetric and free of self-loops and
/// duplicates. Each dense vertex remembers the raw identifier it was read
/// with, so results can be reported in the caller's id space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    raw_ids: Vec<u64>,
    raw_to_dense: HashMap<u64, VertexId>,
}

impl Graph {
    /// Builds a graph from dense undirected edges. Self-loops and repeated
    /// edges are dropped. Raw ids are the dense ids.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let raw_ids = (0..vertex_count as u64).collect();
        Self::with_raw_ids(raw_ids, edges)
    }

    fn with_raw_ids(raw_ids: Vec<u64>, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let n = raw_ids.len();
        let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: x as u64,
                        vertex_count: n,
                    });
                }
            }
            if u != v {
                adjacency[u as usize].push(v);
                adjacency[v as usize].push(u);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for mut list in adjacency {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        let raw_to_dense = raw_ids
            .iter()
            .enumerate()
            .map(|(dense, &raw)| (raw, dense as VertexId))
            .collect();
        Ok(Self {
            offsets,
            neighbors,
            raw_ids,
            raw_to_dense,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn average_degree(&self) -> f64 {
        if self.vertex_count() == 0 {
            0.0
        } else {
            self.neighbors.len() as f64 / self.vertex_count() as f64
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count() as VertexId
    }

    /// Iterates every undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices()
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn raw_id(&self, v: VertexId) -> u64 {
        self.raw_ids[v as usize]
    }

    pub fn raw_ids(&self) -> &[u64] {
        &self.raw_ids
    }

    pub fn dense_id(&self, raw: u64) -> Option<VertexId> {
        self.raw_to_dense.get(&raw).copied()
    }

    pub fn id_map(&self) -> IdMap {
        IdMap {
            raw_ids: self.raw_ids.clone(),
            raw_to_dense: self.raw_to_dense.clone(),
        }
    }

    /// Returns `true` when every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == self.vertex_count()
    }

    /// Writes the graph in edge-list form such that [`parse_edge_list`]
    /// reproduces it exactly.
    ///
    /// A `v v` line per vertex comes first: self-loops are discarded by the
    /// parser but still fix the first-appearance order of the raw ids, which
    /// also preserves isolated vertices.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {} vertices, {} edges", self.vertex_count(), self.edge_count())?;
        for &raw in &self.raw_ids {
            writeln!(out, "{raw} {raw}")?;
        }
        for (u, v) in self.edges() {
            writeln!(out, "{}\t{}", self.raw_id(u), self.raw_id(v))?;
        }
        Ok(())
    }
}

/// Dense-to-raw vertex id mapping, stored next to label files so that
/// tools can speak in the ids of the original edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    raw_ids: Vec<u64>,
    raw_to_dense: HashMap<u64, VertexId>,
}

impl IdMap {
    pub fn new(raw_ids: Vec<u64>) -> Result<Self> {
        let mut raw_to_dense = HashMap::with_capacity(raw_ids.len());
        for (dense, &raw) in raw_ids.iter().enumerate() {
            if raw_to_dense.insert(raw, dense as VertexId).is_some() {
                return Err(Error::Format(format!("raw id {raw} listed twice")));
            }
        }
        Ok(Self { raw_ids, raw_to_dense })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n as u64).collect()).expect("identity ids are distinct")
    }

    pub fn len(&self) -> usize {
        self.raw_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_ids.is_empty()
    }

    pub fn raw(&self, v: VertexId) -> u64 {
        self.raw_ids[v as usize]
    }

    pub fn dense(&self, raw: u64) -> Result<VertexId> {
        self.raw_to_dense.get(&raw).copied().ok_or(Error::UnknownVertex(raw))
    }

    /// One raw id per line, in dense order.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for raw in &self.raw_ids {
            writeln!(out, "{raw}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut raw_ids = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            raw_ids.push(trimmed.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid vertex id {trimmed:?}"),
            })?);
        }
        Self::new(raw_ids)
    }
}

/// Parses a whitespace separated edge list.
///
/// Lines starting with `#` or `%` and blank lines are skipped. Raw ids are
/// remapped to dense ids in order of first appearance.
pub fn parse_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut raw_ids = Vec::new();
    let mut raw_to_dense: HashMap<u64, VertexId> = HashMap::new();
    let mut edges = Vec::new();

    let mut intern = |raw: u64, raw_ids: &mut Vec<u64>| -> VertexId {
        *raw_to_dense.entry(raw).or_insert_with(|| {
            raw_ids.push(raw);
            (raw_ids.len() - 1) as VertexId
        })
    };

    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(format!(
                "expected 2 vertex ids, found {} tokens",
                tokens.len()
            )));
        }
        let mut ends = [0u64; 2];
        for (slot, token) in ends.iter_mut().zip(&tokens) {
            *slot = token
                .parse::<u64>()
                .map_err(|_| parse_err(format!("invalid vertex id {token:?}")))?;
        }
        let u = intern(ends[0], &mut raw_ids);
        let v = intern(ends[1], &mut raw_ids);
        edges.push((u, v));
    }

    if raw_ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::with_raw_ids(raw_ids, edges)
}

/// Returns the subgraph induced by the largest connected component.
///
/// Size ties go to the component holding the smallest dense id. Surviving
/// vertices keep their relative order, so a connected input comes back
/// unchanged.
pub fn largest_connected_component(graph: &Graph) -> Graph {
    let n = graph.vertex_count();
    let mut component = vec![u32::MAX; n];
    let mut best: Option<(u32, usize)> = None;
    let mut next_id = 0u32;
    let mut queue = VecDeque::new();

    for start in graph.vertices() {
        if component[start as usize] != u32::MAX {
            continue;
        }
        let id = next_id;
        next_id += 1;
        component[start as usize] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &w in graph.neighbors(u) {
                if component[w as usize] == u32::MAX {
                    component[w as usize] = id;
                    queue.push_back(w);
                }
            }
        }
        if best.is_none_or(|(_, best_size)| size > best_size) {
            best = Some((id, size));
        }
    }

    let Some((keep, _)) = best else {
        return graph.clone();
    };
    let mut remap = vec![u32::MAX; n];
    let mut raw_ids = Vec::new();
    for v in graph.vertices() {
        if component[v as usize] == keep {
            remap[v as usize] = raw_ids.len() as VertexId;
            raw_ids.push(graph.raw_id(v));
        }
    }
    let edges = graph
        .edges()
        .filter(|&(u, _)| component[u as usize] == keep)
        .map(|(u, v)| (remap[u as usize], remap[v as usize]));
    Graph::with_raw_ids(raw_ids, edges).expect("remapped ids are in range")
}

/// Processing order for label construction. Position 0 is the first
/// landmark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrdering {
    order: Vec<VertexId>,
    rank: Vec<u32>,
}

impl VertexOrdering {
    pub fn from_order(order: Vec<VertexId>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![u32::MAX; n];
        for (position, &v) in order.iter().enumerate() {
            let slot = rank.get_mut(v as usize).ok_or(Error::VertexOutOfRange {
                vertex: v as u64,
                vertex_count: n,
            })?;
            if *slot != u32::MAX {
                return Err(Error::Config(format!("vertex {v} appears twice in ordering")));
            }
            *slot = position as u32;
        }
        Ok(Self { order, rank })
    }

    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn rank(&self, v: VertexId) -> u32 {
        self.rank[v as usize]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Degree descending, ties by ascending vertex id.
pub fn degree_ordering(graph: &Graph) -> VertexOrdering {
    let mut order: Vec<VertexId> = graph.vertices().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    VertexOrdering::from_order(order).expect("sorted vertex list is a permutation")
}
