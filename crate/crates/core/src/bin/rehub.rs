use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use rehub::bench::{run_sweep, SweepConfig};
use rehub::objects::parse_object_ids;
use rehub::offline::{index_stats, offline_preprocess};
use rehub::oracle::oracle_rknn;
use rehub::{
    build_pll_labels, degree_ordering, knn_query, largest_connected_component, parse_edge_list, rknn_query, Error,
    Graph, IdMap, LabelSet, ObjectSet, OfflineIndex, INFINITY,
};

/// Reverse k-nearest-neighbor queries over hub labels.
#[derive(Debug, Parser)]
#[command(name = "rehub", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build hub labels for the largest connected component of a graph.
    Build {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the offline phase for an object set.
    Preprocess {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        objects: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        threads: Option<u32>,
    },
    /// Reverse k nearest neighbors of a vertex.
    Query {
        #[command(flatten)]
        target: QueryTarget,
        /// Print every object, with `inf` for non-members.
        #[arg(long)]
        all: bool,
        /// Answer by brute-force BFS instead (requires --graph).
        #[arg(long, requires = "graph")]
        oracle: bool,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// k nearest objects of a vertex.
    Knn {
        #[command(flatten)]
        target: QueryTarget,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
    },
    /// Sweep densities, k and ball sizes; write CSV.
    Bench {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.1")]
        densities: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
        ks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        balls: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        sets: usize,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        threads: Option<u32>,
    },
    /// Print sizes of a graph, a label set and/or an index.
    Stats {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, requires = "labels")]
        index: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct QueryTarget {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    index: PathBuf,
    /// Raw vertex id as it appears in the edge list.
    #[arg(long)]
    vertex: u64,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn ids_path(labels: &Path) -> PathBuf {
    let mut p = labels.as_os_str().to_owned();
    p.push(".ids");
    PathBuf::from(p)
}

fn load_graph(path: &Path) -> CliResult<Graph> {
    let graph = parse_edge_list(open(path)?)?;
    let lcc = largest_connected_component(&graph);
    if lcc.vertex_count() != graph.vertex_count() {
        info!(
            "kept largest component: {} of {} vertices",
            lcc.vertex_count(),
            graph.vertex_count()
        );
    }
    Ok(lcc)
}

fn load_labels(path: &Path) -> CliResult<(LabelSet, IdMap)> {
    let labels = LabelSet::load(open(path)?)?;
    let ids_file = ids_path(path);
    let ids = if ids_file.exists() {
        IdMap::read(open(&ids_file)?)?
    } else {
        IdMap::identity(labels.vertex_count())
    };
    if ids.len() != labels.vertex_count() {
        return Err(Failure::Data(format!(
            "{} lists {} ids for {} labeled vertices",
            ids_file.display(),
            ids.len(),
            labels.vertex_count()
        )));
    }
    Ok((labels, ids))
}

fn format_dist(d: u32) -> String {
    if d == INFINITY {
        "inf".to_string()
    } else {
        d.to_string()
    }
}

fn run(command: Command) -> CliResult {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match command {
        Command::Build { graph, out: target } => {
            let graph = load_graph(&graph)?;
            let start = Instant::now();
            let labels = build_pll_labels(&graph, &degree_ordering(&graph))?;
            info!("labels built in {:.3} s", start.elapsed().as_secs_f64());
            labels.save(create(&target)?)?;
            graph.id_map().write(create(&ids_path(&target))?)?;
            writeln!(
                out,
                "vertices\t{}\nlabel_pairs\t{}\navg_label_size\t{:.2}",
                labels.vertex_count(),
                labels.total_pairs(),
                labels.average_label_size()
            )?;
        }
        Command::Preprocess {
            labels,
            objects,
            k,
            out: target,
            threads,
        } => {
            let (labels, ids) = load_labels(&labels)?;
            let raw = parse_object_ids(open(&objects)?)?;
            let dense = raw.iter().map(|&r| ids.dense(r)).collect::<Result<Vec<_>, _>>()?;
            let objects = ObjectSet::new(labels.vertex_count(), dense)?;
            let index = offline_preprocess(&labels, &objects, k as usize, threads.map(|t| t as usize))?;
            index.save(create(&target)?)?;
            let t = index.timings();
            writeln!(
                out,
                "objects\t{}\nk\t{k}\nrknn_pairs\t{}\nepsilon\t{:.6}\nknn_labels_ms\t{:.3}\nbatch_knn_ms\t{:.3}\nrknn_labels_ms\t{:.3}",
                objects.len(),
                index.rknn_labels().total_pairs(),
                index.epsilon(&labels),
                t.knn_labels.as_secs_f64() * 1e3,
                t.batch_knn.as_secs_f64() * 1e3,
                t.rknn_labels.as_secs_f64() * 1e3,
            )?;
        }
        Command::Query {
            target,
            all,
            oracle,
            graph,
        } => {
            let (labels, ids) = load_labels(&target.labels)?;
            let index = OfflineIndex::load(open(&target.index)?, &labels)?;
            let q = ids.dense(target.vertex)?;
            let objects = index.objects();
            let distances: Vec<u32> = if oracle {
                let graph = load_graph(graph.as_deref().expect("clap enforces --graph"))?;
                if graph.vertex_count() != labels.vertex_count() {
                    return Err(Failure::Data("graph and labels differ in vertex count".into()));
                }
                let mut d = vec![INFINITY; objects.len()];
                for n in oracle_rknn(&graph, objects, q, index.k()) {
                    d[n.idx as usize] = n.dist;
                }
                d
            } else {
                rknn_query(&index, &labels, q)?.distances().to_vec()
            };
            for (i, &d) in distances.iter().enumerate() {
                if all || d != INFINITY {
                    writeln!(out, "{}\t{}", ids.raw(objects.vertex(i)), format_dist(d))?;
                }
            }
        }
        Command::Knn { target, k } => {
            let (labels, ids) = load_labels(&target.labels)?;
            let index = OfflineIndex::load(open(&target.index)?, &labels)?;
            let q = ids.dense(target.vertex)?;
            let knn_labels = index.knn_backward_labels(&labels)?;
            for n in knn_query(&knn_labels, &labels, q, k as usize)? {
                writeln!(out, "{}\t{}", ids.raw(index.objects().vertex(n.idx as usize)), n.dist)?;
            }
        }
        Command::Bench {
            graph,
            labels,
            densities,
            ks,
            balls,
            sets,
            queries,
            seed,
            out: target,
            threads,
        } => {
            let name = graph
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let graph = load_graph(&graph)?;
            let (labels, _) = load_labels(&labels)?;
            if graph.vertex_count() != labels.vertex_count() {
                return Err(Failure::Data("graph and labels differ in vertex count".into()));
            }
            let config = SweepConfig {
                densities,
                ks,
                balls,
                sets_per_point: sets,
                queries_per_set: queries,
                seed,
                threads: threads.map(|t| t as usize),
            };
            let records = run_sweep(&graph, &name, &labels, &config, create(&target)?)?;
            writeln!(out, "records\t{}", records.len())?;
        }
        Command::Stats { graph, labels, index } => {
            if let Some(path) = graph {
                let graph = parse_edge_list(open(&path)?)?;
                let lcc = largest_connected_component(&graph);
                writeln!(out, "vertices\t{}", graph.vertex_count())?;
                writeln!(out, "edges\t{}", graph.edge_count())?;
                writeln!(out, "avg_degree\t{:.3}", graph.average_degree())?;
                writeln!(out, "lcc_vertices\t{}", lcc.vertex_count())?;
                writeln!(out, "lcc_edges\t{}", lcc.edge_count())?;
            }
            if let Some(path) = labels {
                let (labels, _) = load_labels(&path)?;
                writeln!(out, "label_vertices\t{}", labels.vertex_count())?;
                writeln!(out, "label_pairs\t{}", labels.total_pairs())?;
                writeln!(out, "avg_label_size\t{:.3}", labels.average_label_size())?;
                if let Some(path) = index {
                    let index = OfflineIndex::load(open(&path)?, &labels)?;
                    let knn_labels = index.knn_backward_labels(&labels)?;
                    let s = index_stats(&labels, &index, &knn_labels);
                    writeln!(out, "objects\t{}", s.object_count)?;
                    writeln!(out, "density\t{:.6}", s.density)?;
                    writeln!(out, "k\t{}", s.k)?;
                    writeln!(out, "object_label_pairs\t{}", s.object_label_pairs)?;
                    writeln!(out, "knn_backward_pairs\t{}", s.knn_backward_pairs)?;
                    writeln!(out, "knn_result_pairs\t{}", s.knn_result_pairs)?;
                    writeln!(out, "rknn_pairs\t{}", s.rknn_pairs)?;
                    writeln!(out, "epsilon\t{:.6}", s.epsilon)?;
                    writeln!(out, "# actual bytes at 5 bytes per pair")?;
                    writeln!(out, "bytes_knn_labels\t{}", s.actual_knn_labels_bytes)?;
                    writeln!(out, "bytes_knn_results\t{}", s.actual_knn_results_bytes)?;
                    writeln!(out, "bytes_rknn_labels\t{}", s.actual_rknn_labels_bytes)?;
                    writeln!(out, "# memory model: 5(k+1)|V|, 5kD|V|, 5εD|HL|, D|V|")?;
                    writeln!(out, "model_bytes_knn_labels\t{:.0}", s.model_knn_labels_bytes)?;
                    writeln!(out, "model_bytes_knn_results\t{:.0}", s.model_knn_results_bytes)?;
                    writeln!(out, "model_bytes_rknn_labels\t{:.0}", s.model_rknn_labels_bytes)?;
                    writeln!(out, "model_bytes_online\t{:.0}", s.model_online_bytes)?;
                    writeln!(out, "model_online_accesses\t{:.1}", s.model_online_accesses)?;
                }
            } else if index.is_some() {
                return Err(Failure::Usage("--index requires --labels".into()));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
