//! Sweeps over object density, `k` and object clustering, reporting offline
//! and online costs as CSV.
//!
//! Each grid point draws `sets_per_point` object sets, runs the offline
//! phase once per set and times `queries_per_set` RkNN queries from
//! uniformly random vertices. Label construction is not timed here.
//!
//! CSV columns, in order: `graph, vertices, label_pairs, density, k, ball,
//! sets, queries, objects, knn_labels_ms, batch_knn_ms, rknn_labels_ms,
//! offline_total_ms, online_mean_us, online_median_us, online_touched_mean,
//! epsilon, knn_backward_pairs, knn_result_pairs, rknn_pairs,
//! object_label_pairs, model_knn_labels_bytes, model_knn_results_bytes,
//! model_rknn_labels_bytes, model_online_bytes`. Times, pair counts and ε
//! are means over the object sets of the grid point.

use std::io::Write;
use std::time::{Duration, Instant};

use log::warn;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::labels::LabelSet;
use crate::objects::ObjectSet;
use crate::offline::{index_stats, offline_preprocess_with_knn};
use crate::online::rknn_query_counted;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub densities: Vec<f64>,
    pub ks: Vec<usize>,
    /// Ball fractions; `1.0` means objects spread over the whole graph.
    pub balls: Vec<f64>,
    pub sets_per_point: usize,
    pub queries_per_set: usize,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            densities: vec![0.001, 0.01, 0.1],
            ks: vec![1, 2, 4, 8, 16, 32],
            balls: vec![1.0],
            sets_per_point: 100,
            queries_per_set: 100,
            seed: 0,
            threads: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let fraction_ok = |x: &f64| *x > 0.0 && *x <= 1.0;
        if self.densities.is_empty() || !self.densities.iter().all(fraction_ok) {
            return Err(Error::Config("densities must lie in (0, 1]".into()));
        }
        if self.balls.is_empty() || !self.balls.iter().all(fraction_ok) {
            return Err(Error::Config("ball fractions must lie in (0, 1]".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("k values must be positive".into()));
        }
        if self.sets_per_point == 0 || self.queries_per_set == 0 {
            return Err(Error::Config("set and query counts must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub graph: String,
    pub vertices: usize,
    pub label_pairs: usize,
    pub density: f64,
    pub k: usize,
    pub ball: f64,
    pub sets: usize,
    pub queries: usize,
    pub objects: usize,
    pub knn_labels_ms: f64,
    pub batch_knn_ms: f64,
    pub rknn_labels_ms: f64,
    pub offline_total_ms: f64,
    pub online_mean_us: f64,
    pub online_median_us: f64,
    pub online_touched_mean: f64,
    pub epsilon: f64,
    pub knn_backward_pairs: f64,
    pub knn_result_pairs: f64,
    pub rknn_pairs: f64,
    pub object_label_pairs: f64,
    pub model_knn_labels_bytes: f64,
    pub model_knn_results_bytes: f64,
    pub model_rknn_labels_bytes: f64,
    pub model_online_bytes: f64,
}

/// `⌈fraction · n⌉`, tolerant of representation error in `fraction`.
pub fn fraction_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Uniform sample without replacement of `⌈density · |V|⌉` vertices.
pub fn generate_random_objects(graph: &Graph, density: f64, seed: u64) -> Result<ObjectSet> {
    let n = graph.vertex_count();
    let size = fraction_count(density, n);
    if size < 2 || size > n {
        return Err(Error::Config(format!(
            "density {density} gives {size} objects on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = sample(&mut rng, n, size).into_iter().map(|v| v as VertexId).collect();
    ObjectSet::new(n, picked)
}

/// The first `size` vertices reached by a BFS from `root`. Each level is
/// taken in ascending vertex order, so a partially taken last level keeps
/// its smallest ids.
pub fn bfs_ball(graph: &Graph, root: VertexId, size: usize) -> Vec<VertexId> {
    let mut seen = vec![false; graph.vertex_count()];
    seen[root as usize] = true;
    let mut ball = Vec::with_capacity(size);
    let mut level = vec![root];
    while !level.is_empty() && ball.len() < size {
        level.sort_unstable();
        let take = (size - ball.len()).min(level.len());
        ball.extend_from_slice(&level[..take]);
        let mut next = Vec::new();
        for &u in &level {
            for &w in graph.neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    next.push(w);
                }
            }
        }
        level = next;
    }
    ball
}

/// Objects clustered around a random root: a BFS ball of `⌈ball · |V|⌉`
/// vertices, then a uniform subset of `⌈density · |V|⌉` of them. Returns
/// the objects and the root.
pub fn generate_ball_objects(graph: &Graph, density: f64, ball: f64, seed: u64) -> Result<(ObjectSet, VertexId)> {
    let n = graph.vertex_count();
    let size = fraction_count(density, n);
    let ball_size = fraction_count(ball, n);
    if size < 2 || ball_size < size || ball_size > n {
        return Err(Error::Config(format!(
            "ball of {ball_size} vertices cannot host {size} objects on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = rng.gen_range(0..n) as VertexId;
    let members = bfs_ball(graph, root, ball_size);
    if members.len() < size {
        return Err(Error::Config(format!(
            "component of vertex {root} holds only {} vertices",
            members.len()
        )));
    }
    let picked = sample(&mut rng, members.len(), size)
        .into_iter()
        .map(|i| members[i])
        .collect();
    Ok((ObjectSet::new(n, picked)?, root))
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    }
}

/// Runs every `(density, k, ball)` grid point, writing one CSV row per
/// point to `sink` and returning the records. Infeasible points are skipped
/// with a warning.
pub fn run_sweep<W: Write>(
    graph: &Graph,
    graph_name: &str,
    labels: &LabelSet,
    config: &SweepConfig,
    sink: W,
) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    if labels.vertex_count() != graph.vertex_count() {
        return Err(Error::Mismatch("labels and graph differ in vertex count".into()));
    }
    let n = graph.vertex_count();
    let mut writer = csv::Writer::from_writer(sink);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();

    for &density in &config.densities {
        for &k in &config.ks {
            for &ball in &config.balls {
                let size = fraction_count(density, n);
                if size < k + 1 || fraction_count(ball, n) < size {
                    warn!("skipping D={density} k={k} B={ball}: {size} objects on {n} vertices");
                    continue;
                }
                match sweep_point(graph, graph_name, labels, config, density, k, ball, &mut rng) {
                    Ok(record) => {
                        writer
                            .serialize(&record)
                            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                        records.push(record);
                    }
                    Err(e @ (Error::Config(_) | Error::InsufficientObjects { .. })) => {
                        warn!("skipping D={density} k={k} B={ball}: {e}");
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    writer.flush()?;
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn sweep_point(
    graph: &Graph,
    graph_name: &str,
    labels: &LabelSet,
    config: &SweepConfig,
    density: f64,
    k: usize,
    ball: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SweepRecord> {
    let n = graph.vertex_count();
    let sets = config.sets_per_point;
    let mut sums = [0.0f64; 9];
    let mut online_us = Vec::with_capacity(sets * config.queries_per_set);
    let mut touched_total = 0usize;
    let mut object_count = 0;

    for _ in 0..sets {
        let set_seed: u64 = rng.gen();
        let objects = if ball >= 1.0 {
            generate_random_objects(graph, density, set_seed)?
        } else {
            generate_ball_objects(graph, density, ball, set_seed)?.0
        };
        object_count = objects.len();
        let (index, knn_labels) = offline_preprocess_with_knn(labels, &objects, k, config.threads)?;
        let t = index.timings();
        let stats = index_stats(labels, &index, &knn_labels);
        for (slot, value) in sums.iter_mut().zip([
            millis(t.knn_labels),
            millis(t.batch_knn),
            millis(t.rknn_labels),
            millis(t.total),
            stats.epsilon,
            stats.knn_backward_pairs as f64,
            stats.knn_result_pairs as f64,
            stats.rknn_pairs as f64,
            stats.object_label_pairs as f64,
        ]) {
            *slot += value;
        }

        for _ in 0..config.queries_per_set {
            let q = rng.gen_range(0..n) as VertexId;
            let start = Instant::now();
            let (answer, touched) = rknn_query_counted(&index, labels, q)?;
            let elapsed = start.elapsed();
            std::hint::black_box(&answer);
            online_us.push(elapsed.as_secs_f64() * 1e6);
            touched_total += touched;
        }
    }

    let mean = |i: usize| sums[i] / sets as f64;
    let queries = online_us.len();
    let online_mean_us = online_us.iter().sum::<f64>() / queries as f64;
    let epsilon = mean(4);
    let hl = labels.total_pairs() as f64;
    let d = object_count as f64 / n as f64;
    Ok(SweepRecord {
        graph: graph_name.to_string(),
        vertices: n,
        label_pairs: labels.total_pairs(),
        density,
        k,
        ball,
        sets,
        queries: config.queries_per_set,
        objects: object_count,
        knn_labels_ms: mean(0),
        batch_knn_ms: mean(1),
        rknn_labels_ms: mean(2),
        offline_total_ms: mean(3),
        online_mean_us,
        online_median_us: median(&mut online_us),
        online_touched_mean: touched_total as f64 / queries as f64,
        epsilon,
        knn_backward_pairs: mean(5),
        knn_result_pairs: mean(6),
        rknn_pairs: mean(7),
        object_label_pairs: mean(8),
        model_knn_labels_bytes: 5.0 * (k as f64 + 1.0) * n as f64,
        model_knn_results_bytes: 5.0 * k as f64 * d * n as f64,
        model_rknn_labels_bytes: 5.0 * epsilon * d * hl,
        model_online_bytes: d * n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::degree_ordering;
    use crate::labels::build_pll_labels;
    use crate::oracle::bfs_distances;
    use crate::synth;

    #[test]
    fn full_density_takes_every_vertex() {
        let g = synth::uniform_connected(40, 10, 1);
        let mut all = generate_random_objects(&g, 1.0, 9).unwrap().vertices().to_vec();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn random_objects_are_seeded() {
        let g = synth::uniform_connected(200, 50, 2);
        assert_eq!(
            generate_random_objects(&g, 0.1, 5).unwrap(),
            generate_random_objects(&g, 0.1, 5).unwrap()
        );
        assert_ne!(
            generate_random_objects(&g, 0.1, 5).unwrap(),
            generate_random_objects(&g, 0.1, 6).unwrap()
        );
    }

    #[test]
    fn sample_sizes_are_ceilings() {
        let g = synth::uniform_connected(97, 10, 3);
        for draw in 0..1000u64 {
            let density = 0.02 + (draw % 50) as f64 / 100.0;
            let expected = (density * 97.0 - 1e-9).ceil() as usize;
            let objects = generate_random_objects(&g, density, draw).unwrap();
            assert_eq!(objects.len(), expected, "density {density}");
        }
        assert_eq!(fraction_count(0.1, 100), 10);
        assert_eq!(fraction_count(0.3, 10), 3);
        assert_eq!(fraction_count(0.001, 1500), 2);
    }

    #[test]
    fn ball_objects_stay_near_root() {
        let g = synth::preferential_attachment(500, 2, 4);
        for seed in 0..10 {
            let (objects, root) = generate_ball_objects(&g, 0.02, 0.1, seed).unwrap();
            let ball = bfs_ball(&g, root, 50);
            let row = bfs_distances(&g, root);
            let radius = ball.iter().map(|&v| row.get(v)).max().unwrap();
            assert_eq!(objects.len(), 10);
            for &p in objects.vertices() {
                assert!(ball.contains(&p));
                assert!(row.get(p) <= radius);
            }
        }
    }

    #[test]
    fn ball_equal_to_density_is_the_ball() {
        let g = synth::uniform_connected(100, 30, 5);
        let (objects, root) = generate_ball_objects(&g, 0.2, 0.2, 11).unwrap();
        let mut got = objects.vertices().to_vec();
        got.sort_unstable();
        let mut ball = bfs_ball(&g, root, 20);
        ball.sort_unstable();
        assert_eq!(got, ball);
        assert!(generate_ball_objects(&g, 0.3, 0.2, 11).is_err());
    }

    #[test]
    fn bfs_ball_truncates_by_id() {
        let star = Graph::from_edges(6, [(0, 5), (0, 3), (0, 1), (0, 4), (0, 2)]).unwrap();
        assert_eq!(bfs_ball(&star, 0, 3), vec![0, 1, 2]);
    }

    #[test]
    fn fixture_sweep_emits_one_record() {
        let g = fixtures::sample_graph();
        let labels = build_pll_labels(&g, &degree_ordering(&g)).unwrap();
        let config = SweepConfig {
            densities: vec![3.0 / 14.0],
            ks: vec![1],
            balls: vec![1.0],
            sets_per_point: 3,
            queries_per_set: 5,
            seed: 1,
            threads: Some(1),
        };
        let mut csv = Vec::new();
        let records = run_sweep(&g, "sample", &labels, &config, &mut csv).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.objects, 3);
        assert!(r.epsilon > 0.0 && r.epsilon <= 1.0);
        let sum = r.knn_labels_ms + r.batch_knn_ms + r.rknn_labels_ms;
        assert!(sum <= r.offline_total_ms + 1e-6);
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("graph,vertices,label_pairs,density,k,ball,"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let g = synth::uniform_connected(50, 20, 6);
        let labels = build_pll_labels(&g, &degree_ordering(&g)).unwrap();
        let config = SweepConfig {
            densities: vec![0.1],
            ks: vec![1, 4, 8],
            balls: vec![1.0, 0.04],
            sets_per_point: 2,
            queries_per_set: 3,
            seed: 2,
            threads: None,
        };
        // |P| = 5: k = 8 is infeasible, and a 2-vertex ball cannot hold 5 objects.
        let records = run_sweep(&g, "g", &labels, &config, std::io::sink()).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.epsilon <= 1.0));
    }

    #[test]
    fn sweep_is_deterministic_apart_from_timing() {
        let g = synth::preferential_attachment(300, 2, 7);
        let labels = build_pll_labels(&g, &degree_ordering(&g)).unwrap();
        let config = SweepConfig {
            densities: vec![0.05, 0.2],
            ks: vec![1, 3],
            balls: vec![1.0, 0.5],
            sets_per_point: 3,
            queries_per_set: 10,
            seed: 3,
            threads: Some(1),
        };
        let strip = |r: &SweepRecord| {
            (
                r.density,
                r.k,
                r.ball,
                r.objects,
                r.epsilon,
                r.rknn_pairs,
                r.knn_backward_pairs,
                r.online_touched_mean,
            )
        };
        let a: Vec<_> = run_sweep(&g, "g", &labels, &config, std::io::sink())
            .unwrap()
            .iter()
            .map(strip)
            .collect();
        let b: Vec<_> = run_sweep(&g, "g", &labels, &config, std::io::sink())
            .unwrap()
            .iter()
            .map(strip)
            .collect();
        assert_eq!(a.len(), 8);
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig::default();
        assert!(c.validate().is_ok());
        c.densities = vec![0.0];
        assert!(c.validate().is_err());
        c = SweepConfig {
            balls: vec![1.5],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        c = SweepConfig {
            ks: vec![0],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        c = SweepConfig {
            sets_per_point: 0,
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
