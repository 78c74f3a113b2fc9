//! The 14-vertex sample tree with objects at vertices 4, 10 and 12, used as
//! a worked example throughout the tests.

use crate::graph::{Graph, VertexId};
use crate::labels::LabelEntry;

pub const SAMPLE_EDGES: [(VertexId, VertexId); 13] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 5),
    (1, 6),
    (1, 7),
    (2, 8),
    (3, 9),
    (4, 10),
    (5, 11),
    (6, 12),
    (7, 13),
];

pub const SAMPLE_OBJECTS: [VertexId; 3] = [4, 10, 12];

pub fn sample_graph() -> Graph {
    Graph::from_edges(14, SAMPLE_EDGES).expect("fixture edges are valid")
}

pub fn sample_edge_list() -> String {
    SAMPLE_EDGES.iter().map(|(u, v)| format!("{u} {v}\n")).collect()
}

/// Expected degree-ordered pruned landmark labels of the sample tree.
pub fn sample_labels() -> Vec<Vec<LabelEntry>> {
    let raw: [&[(u32, u8)]; 14] = [
        &[(0, 0)],
        &[(0, 1), (1, 0)],
        &[(0, 1), (2, 0)],
        &[(0, 1), (3, 0)],
        &[(0, 1), (4, 0)],
        &[(0, 2), (1, 1), (5, 0)],
        &[(0, 2), (1, 1), (6, 0)],
        &[(0, 2), (1, 1), (7, 0)],
        &[(0, 2), (2, 1), (8, 0)],
        &[(0, 2), (3, 1), (9, 0)],
        &[(0, 2), (4, 1), (10, 0)],
        &[(0, 3), (1, 2), (5, 1), (11, 0)],
        &[(0, 3), (1, 2), (6, 1), (12, 0)],
        &[(0, 3), (1, 2), (7, 1), (13, 0)],
    ];
    raw.iter()
        .map(|label| label.iter().map(|&(hub, dist)| LabelEntry::new(hub, dist)).collect())
        .collect()
}
