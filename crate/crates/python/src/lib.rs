use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use rehub::{KnnBackwardLabels, LabelSet, ObjectSet, OfflineIndex, INFINITY};

fn to_py(err: rehub::Error) -> PyErr {
    match err {
        rehub::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn finite(d: u32) -> Option<u32> {
    (d != INFINITY).then_some(d)
}

/// Undirected, unweighted graph with dense vertex ids `0..n`.
#[pyclass(module = "rehub_py", frozen)]
struct Graph {
    inner: Arc<rehub::Graph>,
}

#[pymethods]
impl Graph {
    #[new]
    fn new(vertex_count: usize, edges: Vec<(u32, u32)>) -> PyResult<Self> {
        let inner = rehub::Graph::from_edges(vertex_count, edges).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    /// Parses an edge list (one `u v` pair per line). Raw ids are mapped to
    /// dense ids in order of first appearance.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = rehub::parse_edge_list(text.as_bytes()).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| to_py(e.into()))?;
        let inner = rehub::parse_edge_list(BufReader::new(file)).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    /// The largest connected component, keeping raw ids.
    fn largest_component(&self) -> Self {
        Self {
            inner: Arc::new(rehub::largest_connected_component(&self.inner)),
        }
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn neighbors(&self, v: u32) -> PyResult<Vec<u32>> {
        self.check(v)?;
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn raw_id(&self, v: u32) -> PyResult<u64> {
        self.check(v)?;
        Ok(self.inner.raw_id(v))
    }

    fn dense_id(&self, raw: u64) -> PyResult<u32> {
        self.inner
            .dense_id(raw)
            .ok_or_else(|| to_py(rehub::Error::UnknownVertex(raw)))
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Breadth-first distances from `source`; `None` where unreachable.
    fn bfs(&self, source: u32) -> PyResult<Vec<Option<u32>>> {
        self.check(source)?;
        let row = rehub::oracle::bfs_distances(&self.inner, source);
        Ok(row.distances().iter().map(|&d| finite(d)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={})",
            self.inner.vertex_count(),
            self.inner.edge_count()
        )
    }
}

impl Graph {
    fn check(&self, v: u32) -> PyResult<()> {
        if (v as usize) < self.inner.vertex_count() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("vertex {v} out of range")))
        }
    }
}

/// Pruned landmark labels of a graph, answering exact distance queries.
#[pyclass(module = "rehub_py", frozen)]
struct Labels {
    inner: Arc<LabelSet>,
}

#[pymethods]
impl Labels {
    /// Builds labels with the degree-descending vertex order.
    #[staticmethod]
    fn build(py: Python<'_>, graph: &Graph) -> PyResult<Self> {
        let g = graph.inner.clone();
        let inner = py
            .detach(move || rehub::build_pll_labels(&g, &rehub::degree_ordering(&g)))
            .map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| to_py(e.into()))?;
        let inner = LabelSet::load(BufReader::new(file)).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(path).map_err(|e| to_py(e.into()))?;
        let mut out = BufWriter::new(file);
        self.inner.save(&mut out).map_err(to_py)?;
        out.flush().map_err(|e| to_py(e.into()))
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn total_pairs(&self) -> usize {
        self.inner.total_pairs()
    }

    #[getter]
    fn average_label_size(&self) -> f64 {
        self.inner.average_label_size()
    }

    /// `(hub, distance)` pairs of `v`'s label, sorted by hub.
    fn label(&self, v: u32) -> PyResult<Vec<(u32, u8)>> {
        let label = self.inner.checked_label(v).map_err(to_py)?;
        Ok(label.iter().map(|e| (e.hub, e.dist)).collect())
    }

    /// Shortest-path distance, or `None` if `s` and `t` are disconnected.
    fn distance(&self, s: u32, t: u32) -> PyResult<Option<u32>> {
        self.inner.distance(s, t).map(finite).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Labels(vertices={}, pairs={})",
            self.inner.vertex_count(),
            self.inner.total_pairs()
        )
    }
}

/// Offline RkNN index over a fixed object set.
#[pyclass(module = "rehub_py", frozen)]
struct Index {
    labels: Arc<LabelSet>,
    index: OfflineIndex,
    knn_labels: KnnBackwardLabels,
}

#[pymethods]
impl Index {
    /// Preprocesses `objects` (dense vertex ids) for queries with `k`
    /// neighbors.
    #[staticmethod]
    #[pyo3(signature = (labels, objects, k, threads=None))]
    fn build(py: Python<'_>, labels: &Labels, objects: Vec<u32>, k: usize, threads: Option<usize>) -> PyResult<Self> {
        let labels = labels.inner.clone();
        let objects = ObjectSet::new(labels.vertex_count(), objects).map_err(to_py)?;
        let (index, knn_labels) = py
            .detach(|| rehub::offline::offline_preprocess_with_knn(&labels, &objects, k, threads))
            .map_err(to_py)?;
        Ok(Self {
            labels,
            index,
            knn_labels,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf, labels: &Labels) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| to_py(e.into()))?;
        let labels = labels.inner.clone();
        let index = OfflineIndex::load(BufReader::new(file), &labels).map_err(to_py)?;
        let knn_labels = index.knn_backward_labels(&labels).map_err(to_py)?;
        Ok(Self {
            labels,
            index,
            knn_labels,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(path).map_err(|e| to_py(e.into()))?;
        let mut out = BufWriter::new(file);
        self.index.save(&mut out).map_err(to_py)?;
        out.flush().map_err(|e| to_py(e.into()))
    }

    #[getter]
    fn k(&self) -> usize {
        self.index.k()
    }

    #[getter]
    fn objects(&self) -> Vec<u32> {
        self.index.objects().vertices().to_vec()
    }

    /// RkNN backward label pairs over object label pairs.
    #[getter]
    fn epsilon(&self) -> f64 {
        self.index.epsilon(&self.labels)
    }

    #[getter]
    fn rknn_pairs(&self) -> usize {
        self.index.rknn_labels().total_pairs()
    }

    /// The k nearest other objects of object `i`, as `(object vertex,
    /// distance)`.
    fn neighbors_of(&self, i: usize) -> PyResult<Vec<(u32, u32)>> {
        if i >= self.index.objects().len() {
            return Err(PyValueError::new_err(format!("object index {i} out of range")));
        }
        Ok(self.object_pairs(self.index.knn_results().row(i).iter().map(|n| (n.idx, n.dist))))
    }

    /// Objects that count `q` among their k nearest neighbors, as
    /// `(object vertex, distance)` in object order.
    fn rknn(&self, q: u32) -> PyResult<Vec<(u32, u32)>> {
        let answer = rehub::rknn_query(&self.index, &self.labels, q).map_err(to_py)?;
        Ok(self.object_pairs(answer.members().map(|n| (n.idx, n.dist))))
    }

    /// The `k` objects nearest to `q` (default: the index's k).
    #[pyo3(signature = (q, k=None))]
    fn knn(&self, q: u32, k: Option<usize>) -> PyResult<Vec<(u32, u32)>> {
        let k = k.unwrap_or(self.index.k());
        let found = rehub::knn_query(&self.knn_labels, &self.labels, q, k).map_err(to_py)?;
        Ok(self.object_pairs(found.iter().map(|n| (n.idx, n.dist))))
    }

    fn __repr__(&self) -> String {
        format!("Index(k={}, objects={})", self.index.k(), self.index.objects().len())
    }
}

impl Index {
    fn object_pairs(&self, pairs: impl Iterator<Item = (u32, u32)>) -> Vec<(u32, u32)> {
        let objects = self.index.objects();
        pairs.map(|(idx, d)| (objects.vertex(idx as usize), d)).collect()
    }
}

#[pymodule]
fn rehub_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Labels>()?;
    m.add_class::<Index>()?;
    Ok(())
}
