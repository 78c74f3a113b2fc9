//! Per-query sweeps over the offline structures.

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::labels::{LabelSet, INFINITY};
use crate::offline::{object_knn, KnnBackwardLabels, OfflineIndex};
use crate::topk::{BoundedBuffer, Neighbor};

/// Distances from the query vertex to the objects in its RkNN set, indexed
/// by object. Objects outside the set hold [`INFINITY`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RknnAnswer {
    distances: Vec<u32>,
}

impl RknnAnswer {
    pub fn distances(&self) -> &[u32] {
        &self.distances
    }

    pub fn get(&self, idx: usize) -> Option<u32> {
        self.distances.get(idx).copied().filter(|&d| d != INFINITY)
    }

    /// `(object index, distance)` for every member, in index order.
    pub fn members(&self) -> impl Iterator<Item = Neighbor> + '_ {
        self.distances
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d != INFINITY)
            .map(|(i, &d)| Neighbor::new(i as u32, d))
    }

    pub fn len(&self) -> usize {
        self.members().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reverse k nearest neighbors of `q`.
///
/// Sweeps `q`'s label against the RkNN backward labels, keeping a distance
/// only while it stays within the object's k-th neighbor distance.
pub fn rknn_query(index: &OfflineIndex, labels: &LabelSet, q: VertexId) -> Result<RknnAnswer> {
    rknn_query_counted(index, labels, q).map(|(answer, _)| answer)
}

/// [`rknn_query`], also returning how many backward label pairs were
/// visited.
pub fn rknn_query_counted(index: &OfflineIndex, labels: &LabelSet, q: VertexId) -> Result<(RknnAnswer, usize)> {
    index.check_labels(labels)?;
    let label = labels.checked_label(q)?;
    let knn = index.knn_results();
    let rknn = index.rknn_labels();
    let mut out = vec![INFINITY; index.objects().len()];
    let mut touched = 0;
    for e in label {
        let d = e.dist as u32;
        let list = rknn.hub(e.hub);
        touched += list.len();
        for pair in list {
            let idx = pair.idx as usize;
            let d2 = d + pair.dist as u32;
            if d2 < out[idx] && d2 <= knn.worst_dist(idx) {
                out[idx] = d2;
            }
        }
    }
    Ok((RknnAnswer { distances: out }, touched))
}

/// The `k` objects nearest to `q`, ascending by distance. `k` may not exceed
/// the `k` the backward labels were built for.
pub fn knn_query(knn_labels: &KnnBackwardLabels, labels: &LabelSet, q: VertexId, k: usize) -> Result<Vec<Neighbor>> {
    if k == 0 || k > knn_labels.k() {
        return Err(Error::Config(format!(
            "kNN queries support 1 <= k <= {}, got {k}",
            knn_labels.k()
        )));
    }
    if knn_labels.lists().hub_count() != labels.vertex_count() {
        return Err(Error::Mismatch("kNN backward labels cover a different graph".into()));
    }
    labels.check_vertex(q)?;
    let mut buffer = BoundedBuffer::new(k);
    object_knn(labels, knn_labels, q, None, &mut buffer);
    Ok(buffer.into_vec())
}
