//! Reverse k-nearest-neighbor (RkNN) and kNN queries on large undirected,
//! unweighted graphs, answered from 2-hop hub labels.
//!
//! The pipeline is:
//!
//! 1. [`graph`]: read an edge list, keep the largest connected component.
//! 2. [`labels`]: build pruned landmark labels in degree order.
//! 3. [`offline`]: for a fixed object set and `k`, build the kNN backward
//!    labels, every object's `k` nearest objects, and the pruned RkNN
//!    backward labels.
//! 4. [`online`]: answer RkNN (and kNN) queries with one label sweep.
//!
//! [`oracle`] holds BFS reference implementations and [`bench`] the
//! parameter sweep harness.
//!
//! Only undirected graphs are handled. A directed or weighted variant
//! would need separate forward and backward labels and Dijkstra-based
//! construction; [`labels::LabelSet`] stores one label per vertex.

pub mod bench;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod labels;
pub mod objects;
pub mod offline;
pub mod online;
pub mod oracle;
pub mod synth;
pub mod topk;

pub use error::{Error, Result};
pub use graph::{
    degree_ordering, largest_connected_component, parse_edge_list, Graph, IdMap, VertexId, VertexOrdering,
};
pub use labels::{build_pll_labels, LabelEntry, LabelSet, INFINITY};
pub use objects::ObjectSet;
pub use offline::{
    batch_knn, build_knn_backward_labels, build_rknn_backward_labels, offline_preprocess, KnnBackwardLabels,
    KnnResultTable, OfflineIndex, RknnBackwardLabels,
};
pub use online::{knn_query, rknn_query, RknnAnswer};
pub use topk::Neighbor;
