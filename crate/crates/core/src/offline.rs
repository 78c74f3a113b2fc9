//! Object-set dependent preprocessing: kNN backward labels, per-object kNN
//! and the pruned RkNN backward labels.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::labels::{read_magic, read_u32, read_u8, LabelSet};
use crate::objects::ObjectSet;
use crate::topk::{BoundedBuffer, Neighbor};

const INDEX_MAGIC: &[u8; 4] = b"RHIX";
const INDEX_VERSION: u8 = 1;

/// An object index and its distance to a hub.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HubPair {
    pub idx: u32,
    pub dist: u8,
}

/// Per-hub lists of [`HubPair`]s in compressed row form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HubLists {
    offsets: Vec<usize>,
    pairs: Vec<HubPair>,
}

impl HubLists {
    fn from_lists(lists: impl ExactSizeIterator<Item = impl IntoIterator<Item = HubPair>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut pairs = Vec::new();
        offsets.push(0);
        for list in lists {
            pairs.extend(list);
            offsets.push(pairs.len());
        }
        Self { offsets, pairs }
    }

    pub fn hub_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn hub(&self, hub: u32) -> &[HubPair] {
        let h = hub as usize;
        &self.pairs[self.offsets[h]..self.offsets[h + 1]]
    }

    pub fn total_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &[HubPair])> {
        (0..self.hub_count() as u32).map(move |h| (h, self.hub(h)))
    }
}

/// For every hub, the `k + 1` object pairs with the smallest distances.
///
/// One slot more than `k` is kept so that an object looking for its own
/// neighbors still sees `k` others after skipping itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnBackwardLabels {
    k: usize,
    lists: HubLists,
}

impl KnnBackwardLabels {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn hub(&self, hub: u32) -> &[HubPair] {
        self.lists.hub(hub)
    }

    pub fn lists(&self) -> &HubLists {
        &self.lists
    }

    pub fn total_pairs(&self) -> usize {
        self.lists.total_pairs()
    }
}

/// Each object's `k` nearest other objects, ascending by distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnResultTable {
    k: usize,
    rows: Vec<Neighbor>,
}

impl KnnResultTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn object_count(&self) -> usize {
        self.rows.len() / self.k
    }

    pub fn row(&self, i: usize) -> &[Neighbor] {
        &self.rows[i * self.k..(i + 1) * self.k]
    }

    /// Distance from object `i` to its k-th nearest other object.
    pub fn worst_dist(&self, i: usize) -> u32 {
        self.rows[(i + 1) * self.k - 1].dist
    }

    pub fn total_pairs(&self) -> usize {
        self.rows.len()
    }
}

/// Object label pairs regrouped by hub, keeping only pairs no farther than
/// the object's k-th neighbor distance. Lists are in object-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RknnBackwardLabels {
    lists: HubLists,
}

impl RknnBackwardLabels {
    pub fn hub(&self, hub: u32) -> &[HubPair] {
        self.lists.hub(hub)
    }

    pub fn lists(&self) -> &HubLists {
        &self.lists
    }

    pub fn total_pairs(&self) -> usize {
        self.lists.total_pairs()
    }
}

/// Wall time of each offline substage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OfflineTimings {
    pub knn_labels: Duration,
    pub batch_knn: Duration,
    pub rknn_labels: Duration,
    pub total: Duration,
}

/// Output of the offline phase for one object set and one `k`.
#[derive(Debug, Clone)]
pub struct OfflineIndex {
    k: usize,
    objects: ObjectSet,
    knn_results: KnnResultTable,
    rknn_labels: RknnBackwardLabels,
    labels_fingerprint: u64,
    timings: OfflineTimings,
}

impl PartialEq for OfflineIndex {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.objects == other.objects
            && self.knn_results == other.knn_results
            && self.rknn_labels == other.rknn_labels
            && self.labels_fingerprint == other.labels_fingerprint
    }
}

fn check_objects(labels: &LabelSet, objects: &ObjectSet, k: usize) -> Result<()> {
    objects.require_neighbors(k)?;
    for &v in objects.vertices() {
        labels.check_vertex(v)?;
    }
    Ok(())
}

/// Pushes every object label pair into its hub's bounded buffer of
/// capacity `k + 1`.
pub fn build_knn_backward_labels(labels: &LabelSet, objects: &ObjectSet, k: usize) -> Result<KnnBackwardLabels> {
    check_objects(labels, objects, k)?;
    let mut buffers: Vec<BoundedBuffer> = (0..labels.vertex_count()).map(|_| BoundedBuffer::new(k + 1)).collect();
    for (i, &p) in objects.vertices().iter().enumerate() {
        for e in labels.label(p) {
            buffers[e.hub as usize].push(Neighbor::new(i as u32, e.dist as u32));
        }
    }
    let lists = HubLists::from_lists(buffers.into_iter().map(|b| {
        b.into_vec().into_iter().map(|n| HubPair {
            idx: n.idx,
            dist: n.dist as u8,
        })
    }));
    Ok(KnnBackwardLabels { k, lists })
}

pub(crate) fn object_knn(
    labels: &LabelSet,
    knn_labels: &KnnBackwardLabels,
    source: u32,
    skip: Option<u32>,
    buffer: &mut BoundedBuffer,
) {
    for e in labels.label(source) {
        let d = e.dist as u32;
        if buffer.worst().is_some_and(|w| d > w) {
            continue;
        }
        for pair in knn_labels.hub(e.hub) {
            if Some(pair.idx) == skip {
                continue;
            }
            let d2 = d + pair.dist as u32;
            if buffer.worst().is_some_and(|w| d2 > w) {
                break;
            }
            buffer.push_unique(Neighbor::new(pair.idx, d2));
        }
    }
}

/// Computes every object's `k` nearest other objects from the kNN backward
/// labels. Rows are independent and computed in parallel; `threads` sets
/// the worker count (`None` uses the global pool).
pub fn batch_knn(
    labels: &LabelSet,
    objects: &ObjectSet,
    k: usize,
    knn_labels: &KnnBackwardLabels,
    threads: Option<usize>,
) -> Result<KnnResultTable> {
    check_objects(labels, objects, k)?;
    if knn_labels.k != k || knn_labels.lists.hub_count() != labels.vertex_count() {
        return Err(Error::Config(format!(
            "kNN backward labels were built for k = {} over {} hubs",
            knn_labels.k,
            knn_labels.lists.hub_count()
        )));
    }

    let mut rows = vec![Neighbor::new(0, 0); objects.len() * k];
    let compute = |rows: &mut [Neighbor]| -> Result<()> {
        rows.par_chunks_mut(k).enumerate().try_for_each_init(
            || BoundedBuffer::new(k),
            |buffer, (i, row)| {
                buffer.clear();
                object_knn(labels, knn_labels, objects.vertex(i), Some(i as u32), buffer);
                if buffer.len() < k {
                    return Err(Error::InsufficientObjects {
                        object: i,
                        found: buffer.len(),
                        k,
                    });
                }
                row.copy_from_slice(buffer.as_slice());
                Ok(())
            },
        )
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            pool.install(|| compute(&mut rows))?;
        }
        None => compute(&mut rows)?,
    }
    Ok(KnnResultTable { k, rows })
}

/// Keeps each object label pair whose distance does not exceed the
/// object's k-th neighbor distance.
pub fn build_rknn_backward_labels(
    labels: &LabelSet,
    objects: &ObjectSet,
    k: usize,
    knn_results: &KnnResultTable,
) -> Result<RknnBackwardLabels> {
    check_objects(labels, objects, k)?;
    if knn_results.k != k || knn_results.object_count() != objects.len() {
        return Err(Error::Config("kNN results do not match the object set".into()));
    }
    let kept = |i: usize| {
        let worst = knn_results.worst_dist(i);
        labels
            .label(objects.vertex(i))
            .iter()
            .filter(move |e| e.dist as u32 <= worst)
    };

    let n = labels.vertex_count();
    let mut offsets = vec![0usize; n + 1];
    for i in 0..objects.len() {
        for e in kept(i) {
            offsets[e.hub as usize + 1] += 1;
        }
    }
    for h in 0..n {
        offsets[h + 1] += offsets[h];
    }
    let mut cursor = offsets.clone();
    let mut pairs = vec![HubPair { idx: 0, dist: 0 }; offsets[n]];
    for i in 0..objects.len() {
        for e in kept(i) {
            let slot = &mut cursor[e.hub as usize];
            pairs[*slot] = HubPair {
                idx: i as u32,
                dist: e.dist,
            };
            *slot += 1;
        }
    }
    Ok(RknnBackwardLabels {
        lists: HubLists { offsets, pairs },
    })
}

/// Runs the three offline substages in order.
pub fn offline_preprocess(
    labels: &LabelSet,
    objects: &ObjectSet,
    k: usize,
    threads: Option<usize>,
) -> Result<OfflineIndex> {
    let (index, _) = offline_preprocess_with_knn(labels, objects, k, threads)?;
    Ok(index)
}

/// Like [`offline_preprocess`], also handing back the kNN backward labels
/// for answering kNN queries.
pub fn offline_preprocess_with_knn(
    labels: &LabelSet,
    objects: &ObjectSet,
    k: usize,
    threads: Option<usize>,
) -> Result<(OfflineIndex, KnnBackwardLabels)> {
    let start = Instant::now();
    let knn_labels = build_knn_backward_labels(labels, objects, k)?;
    let t_knn = start.elapsed();

    let mark = Instant::now();
    let knn_results = batch_knn(labels, objects, k, &knn_labels, threads)?;
    let t_batch = mark.elapsed();

    let mark = Instant::now();
    let rknn_labels = build_rknn_backward_labels(labels, objects, k, &knn_results)?;
    let t_rknn = mark.elapsed();

    let timings = OfflineTimings {
        knn_labels: t_knn,
        batch_knn: t_batch,
        rknn_labels: t_rknn,
        total: start.elapsed(),
    };
    let index = OfflineIndex {
        k,
        objects: objects.clone(),
        knn_results,
        rknn_labels,
        labels_fingerprint: labels.fingerprint(),
        timings,
    };
    Ok((index, knn_labels))
}

impl OfflineIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn objects(&self) -> &ObjectSet {
        &self.objects
    }

    pub fn knn_results(&self) -> &KnnResultTable {
        &self.knn_results
    }

    pub fn rknn_labels(&self) -> &RknnBackwardLabels {
        &self.rknn_labels
    }

    pub fn timings(&self) -> OfflineTimings {
        self.timings
    }

    pub fn labels_fingerprint(&self) -> u64 {
        self.labels_fingerprint
    }

    pub(crate) fn check_labels(&self, labels: &LabelSet) -> Result<()> {
        if self.labels_fingerprint != labels.fingerprint() {
            return Err(Error::Mismatch("index was built from a different label set".into()));
        }
        Ok(())
    }

    /// Rebuilds the kNN backward labels, which the index file does not
    /// carry.
    pub fn knn_backward_labels(&self, labels: &LabelSet) -> Result<KnnBackwardLabels> {
        self.check_labels(labels)?;
        build_knn_backward_labels(labels, &self.objects, self.k)
    }

    /// Number of pairs in all object forward labels, i.e. the size of the
    /// unpruned backward labels-to-many.
    pub fn object_label_pairs(&self, labels: &LabelSet) -> usize {
        self.objects.vertices().iter().map(|&p| labels.label(p).len()).sum()
    }

    /// Fraction of object label pairs that survive into the RkNN backward
    /// labels.
    pub fn epsilon(&self, labels: &LabelSet) -> f64 {
        let all = self.object_label_pairs(labels);
        if all == 0 {
            0.0
        } else {
            self.rknn_labels.total_pairs() as f64 / all as f64
        }
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(INDEX_MAGIC)?;
        out.write_all(&[INDEX_VERSION])?;
        out.write_all(&(self.k as u32).to_le_bytes())?;
        out.write_all(&(self.objects.len() as u32).to_le_bytes())?;
        for &v in self.objects.vertices() {
            out.write_all(&v.to_le_bytes())?;
        }
        for n in &self.knn_results.rows {
            let dist = u8::try_from(n.dist)
                .map_err(|_| Error::Format(format!("kNN distance {} does not fit in a byte", n.dist)))?;
            out.write_all(&n.idx.to_le_bytes())?;
            out.write_all(&[dist])?;
        }
        for (_, list) in self.rknn_labels.lists.iter() {
            out.write_all(&(list.len() as u32).to_le_bytes())?;
            for pair in list {
                out.write_all(&pair.idx.to_le_bytes())?;
                out.write_all(&[pair.dist])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an index file and checks it against `labels`: every kNN
    /// distance must agree with the labels, and the RkNN lists must be
    /// exactly the object label pairs within each object's threshold.
    pub fn load<R: Read>(mut input: R, labels: &LabelSet) -> Result<Self> {
        let magic = read_magic(&mut input)?;
        if &magic != INDEX_MAGIC {
            return Err(Error::Format(format!("bad index file magic {magic:?}")));
        }
        let version = read_u8(&mut input)?;
        if version != INDEX_VERSION {
            return Err(Error::Format(format!("unsupported index file version {version}")));
        }
        let k = read_u32(&mut input)? as usize;
        let count = read_u32(&mut input)? as usize;
        let mut vertices = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            vertices.push(read_u32(&mut input)?);
        }
        let objects = ObjectSet::new(labels.vertex_count(), vertices).map_err(|e| Error::Mismatch(e.to_string()))?;
        objects.require_neighbors(k).map_err(|e| Error::Format(e.to_string()))?;

        let mut rows = Vec::with_capacity(count * k);
        for i in 0..count {
            let start = rows.len();
            for _ in 0..k {
                let idx = read_u32(&mut input)?;
                let dist = read_u8(&mut input)? as u32;
                rows.push(Neighbor::new(idx, dist));
            }
            let row = &rows[start..];
            let bad_row = || Error::Format(format!("kNN row {i} is malformed"));
            if row.windows(2).any(|w| (w[0].dist, w[0].idx) >= (w[1].dist, w[1].idx)) {
                return Err(bad_row());
            }
            for n in row {
                if n.idx as usize >= count || n.idx as usize == i || row.iter().filter(|m| m.idx == n.idx).count() > 1 {
                    return Err(bad_row());
                }
                let truth = labels.distance(objects.vertex(i), objects.vertex(n.idx as usize))?;
                if truth != n.dist {
                    return Err(Error::Mismatch(format!(
                        "kNN row {i} stores distance {} to object {} but the labels give {truth}",
                        n.dist, n.idx
                    )));
                }
            }
        }
        let knn_results = KnnResultTable { k, rows };

        let n = labels.vertex_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut pairs = Vec::new();
        offsets.push(0);
        for hub in 0..n as u32 {
            let len = read_u32(&mut input)? as usize;
            let start = pairs.len();
            for _ in 0..len {
                let idx = read_u32(&mut input)?;
                let dist = read_u8(&mut input)?;
                if idx as usize >= count {
                    return Err(Error::Format(format!("hub {hub} names object {idx} out of range")));
                }
                let owner = labels.label(objects.vertex(idx as usize));
                let present = owner
                    .binary_search_by_key(&hub, |e| e.hub)
                    .is_ok_and(|pos| owner[pos].dist == dist);
                if !present || dist as u32 > knn_results.worst_dist(idx as usize) {
                    return Err(Error::Mismatch(format!(
                        "hub {hub} pair ({idx}, {dist}) is not an admissible object label"
                    )));
                }
                pairs.push(HubPair { idx, dist });
            }
            if pairs[start..].windows(2).any(|w| w[0].idx >= w[1].idx) {
                return Err(Error::Format(format!("hub {hub} list is not in object order")));
            }
            offsets.push(pairs.len());
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            return Err(Error::Mismatch(
                "index has more hub sections than the labels have vertices".into(),
            ));
        }

        let expected: usize = (0..count)
            .map(|i| {
                let worst = knn_results.worst_dist(i);
                labels
                    .label(objects.vertex(i))
                    .iter()
                    .filter(|e| e.dist as u32 <= worst)
                    .count()
            })
            .sum();
        if expected != pairs.len() {
            return Err(Error::Mismatch(format!(
                "index holds {} RkNN pairs, the labels imply {expected}",
                pairs.len()
            )));
        }

        Ok(Self {
            k,
            objects,
            knn_results,
            rknn_labels: RknnBackwardLabels {
                lists: HubLists { offsets, pairs },
            },
            labels_fingerprint: labels.fingerprint(),
            timings: OfflineTimings::default(),
        })
    }
}

/// Pair counts of the index structures next to the byte sizes predicted by
/// the 5-bytes-per-pair memory model (4-byte object index, 1-byte
/// distance).
#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub vertex_count: usize,
    pub label_pairs: usize,
    pub object_count: usize,
    pub k: usize,
    pub density: f64,
    pub knn_backward_pairs: usize,
    pub knn_result_pairs: usize,
    pub rknn_pairs: usize,
    pub object_label_pairs: usize,
    pub epsilon: f64,
    pub model_knn_labels_bytes: f64,
    pub model_knn_results_bytes: f64,
    pub model_rknn_labels_bytes: f64,
    pub model_online_bytes: f64,
    pub model_online_accesses: f64,
    pub actual_knn_labels_bytes: usize,
    pub actual_knn_results_bytes: usize,
    pub actual_rknn_labels_bytes: usize,
}

pub fn index_stats(labels: &LabelSet, index: &OfflineIndex, knn_labels: &KnnBackwardLabels) -> IndexStats {
    let n = labels.vertex_count() as f64;
    let hl = labels.total_pairs() as f64;
    let k = index.k as f64;
    let density = index.objects.density(labels.vertex_count());
    let epsilon = index.epsilon(labels);
    IndexStats {
        vertex_count: labels.vertex_count(),
        label_pairs: labels.total_pairs(),
        object_count: index.objects.len(),
        k: index.k,
        density,
        knn_backward_pairs: knn_labels.total_pairs(),
        knn_result_pairs: index.knn_results.total_pairs(),
        rknn_pairs: index.rknn_labels.total_pairs(),
        object_label_pairs: index.object_label_pairs(labels),
        epsilon,
        model_knn_labels_bytes: 5.0 * (k + 1.0) * n,
        model_knn_results_bytes: 5.0 * k * density * n,
        model_rknn_labels_bytes: 5.0 * epsilon * density * hl,
        model_online_bytes: density * n,
        model_online_accesses: epsilon * density * (hl / n).powi(2),
        actual_knn_labels_bytes: 5 * knn_labels.total_pairs(),
        actual_knn_results_bytes: 5 * index.knn_results.total_pairs(),
        actual_rknn_labels_bytes: 5 * index.rknn_labels.total_pairs(),
    }
}
