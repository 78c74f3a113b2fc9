use std::io;

use thiserror::Error;

/// Errors produced while loading data or building indexes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex {vertex} out of range (graph has {vertex_count} vertices)")]
    VertexOutOfRange { vertex: u64, vertex_count: usize },

    #[error("unknown raw vertex id {0}")]
    UnknownVertex(u64),

    #[error("BFS depth {depth} exceeds the maximum storable distance {max}")]
    DistanceOverflow { depth: u32, max: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("duplicate object at vertex {0}")]
    DuplicateObject(u32),

    #[error("insufficient reachable objects: object {object} found {found} of {k} neighbors")]
    InsufficientObjects { object: usize, found: usize, k: usize },

    #[error("index does not match the label set: {0}")]
    Mismatch(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
