//! Seeded random connected graphs for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};

/// A random spanning tree (each vertex attaches to a uniformly chosen
/// earlier vertex) plus `extra_edges` uniformly random edges.
pub fn uniform_connected(n: usize, extra_edges: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n + extra_edges);
    for v in 1..n {
        edges.push((rng.gen_range(0..v) as VertexId, v as VertexId));
    }
    if n > 1 {
        for _ in 0..extra_edges {
            let u = rng.gen_range(0..n) as VertexId;
            let v = rng.gen_range(0..n) as VertexId;
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges).expect("generated ids are in range")
}

/// Barabási–Albert style preferential attachment: each new vertex links to
/// up to `m` existing vertices picked proportionally to degree.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = m.max(1);
    let mut edges = Vec::with_capacity(n * m);
    // Every edge endpoint, so uniform picks from here are degree-weighted.
    let mut endpoints: Vec<VertexId> = Vec::with_capacity(2 * n * m);
    for v in 1..n as VertexId {
        let mut targets: Vec<VertexId> = Vec::with_capacity(m);
        for _ in 0..m.min(v as usize) {
            let t = loop {
                let t = if endpoints.is_empty() || rng.gen_bool(0.1) {
                    rng.gen_range(0..v)
                } else {
                    endpoints[rng.gen_range(0..endpoints.len())]
                };
                if !targets.contains(&t) {
                    break t;
                }
            };
            targets.push(t);
        }
        for t in targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::from_edges(n, edges).expect("generated ids are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_connected_and_seeded() {
        for seed in 0..5 {
            let u = uniform_connected(100, 50, seed);
            assert!(u.is_connected());
            assert_eq!(u, uniform_connected(100, 50, seed));
            let p = preferential_attachment(100, 3, seed);
            assert!(p.is_connected());
            assert_eq!(p, preferential_attachment(100, 3, seed));
        }
        assert_eq!(preferential_attachment(1, 3, 0).vertex_count(), 1);
    }

    #[test]
    fn preferential_attachment_edge_count() {
        let g = preferential_attachment(1000, 4, 1);
        // 1 + 2 + 3 for the first vertices, then 4 per vertex.
        assert_eq!(g.edge_count(), 6 + 4 * (1000 - 4));
    }
}
