//! Brute-force BFS ground truth for distances, kNN and RkNN.
//!
//! Everything here is deliberately naive and independent of the label
//! based machinery it is used to check.

use std::collections::VecDeque;

use crate::graph::{Graph, VertexId};
use crate::labels::INFINITY;
use crate::objects::ObjectSet;
use crate::topk::Neighbor;

/// BFS hop distances from one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceRow {
    source: VertexId,
    dist: Vec<u32>,
}

impl DistanceRow {
    pub fn source(&self) -> VertexId {
        self.source
    }

    /// Distance to every vertex, [`INFINITY`] when unreachable.
    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn get(&self, v: VertexId) -> u32 {
        self.dist[v as usize]
    }
}

pub fn bfs_distances(graph: &Graph, source: VertexId) -> DistanceRow {
    let mut dist = vec![INFINITY; graph.vertex_count()];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let next = dist[u as usize] + 1;
        for &w in graph.neighbors(u) {
            if dist[w as usize] == INFINITY {
                dist[w as usize] = next;
                queue.push_back(w);
            }
        }
    }
    DistanceRow { source, dist }
}

/// Distances from every object to every other object, `[i][j]`.
pub fn object_distance_matrix(graph: &Graph, objects: &ObjectSet) -> Vec<Vec<u32>> {
    objects
        .vertices()
        .iter()
        .map(|&p| {
            let row = bfs_distances(graph, p);
            objects.vertices().iter().map(|&o| row.get(o)).collect()
        })
        .collect()
}

fn sorted_others(row: &[u32], i: usize) -> Vec<Neighbor> {
    let mut others: Vec<Neighbor> = row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &d)| Neighbor::new(j as u32, d))
        .collect();
    others.sort_by_key(|n| (n.dist, n.idx));
    others
}

/// The `k` nearest other objects of object `i`, by distance then index.
pub fn oracle_knn(graph: &Graph, objects: &ObjectSet, i: usize, k: usize) -> Vec<Neighbor> {
    let row = bfs_distances(graph, objects.vertex(i));
    let dists: Vec<u32> = objects.vertices().iter().map(|&o| row.get(o)).collect();
    let mut others = sorted_others(&dists, i);
    others.truncate(k);
    others
}

/// The `k` objects nearest to an arbitrary vertex `q`, by distance then
/// index.
pub fn oracle_knn_from_vertex(graph: &Graph, objects: &ObjectSet, q: VertexId, k: usize) -> Vec<Neighbor> {
    let row = bfs_distances(graph, q);
    let mut all: Vec<Neighbor> = objects
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &o)| Neighbor::new(i as u32, row.get(o)))
        .collect();
    all.sort_by_key(|n| (n.dist, n.idx));
    all.truncate(k);
    all
}

/// Distance from each object to its k-th nearest other object.
pub fn kth_neighbor_distances(matrix: &[Vec<u32>], k: usize) -> Vec<u32> {
    (0..matrix.len())
        .map(|i| sorted_others(&matrix[i], i).get(k - 1).map_or(INFINITY, |n| n.dist))
        .collect()
}

/// Reverse k nearest neighbors of `q`: every object `p` with
/// `dist(p, q) <= dist(p, p_k)`, returned as `(index, dist(q, p))` in index
/// order.
pub fn oracle_rknn(graph: &Graph, objects: &ObjectSet, q: VertexId, k: usize) -> Vec<Neighbor> {
    let matrix = object_distance_matrix(graph, objects);
    let threshold = kth_neighbor_distances(&matrix, k);
    let from_q = bfs_distances(graph, q);
    objects
        .vertices()
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| {
            let d = from_q.get(p);
            (d != INFINITY && d <= threshold[i]).then(|| Neighbor::new(i as u32, d))
        })
        .collect()
}

/// Same set as [`oracle_rknn`], decided by counting: `p` qualifies when
/// fewer than `k` other objects are strictly closer to `p` than `q` is.
pub fn oracle_rknn_by_count(graph: &Graph, objects: &ObjectSet, q: VertexId, k: usize) -> Vec<Neighbor> {
    let from_q = bfs_distances(graph, q);
    objects
        .vertices()
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| {
            let d = from_q.get(p);
            if d == INFINITY {
                return None;
            }
            let row = bfs_distances(graph, p);
            let closer = objects
                .vertices()
                .iter()
                .enumerate()
                .filter(|&(j, &o)| j != i && row.get(o) < d)
                .count();
            (closer < k).then(|| Neighbor::new(i as u32, d))
        })
        .collect()
}
