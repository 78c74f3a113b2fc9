use std::collections::HashSet;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::VertexId;

/// Vertices hosting objects. Position `i` is the object's index everywhere
/// downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectSet {
    vertices: Vec<VertexId>,
}

impl ObjectSet {
    pub fn new(vertex_count: usize, vertices: Vec<VertexId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(vertices.len());
        for &v in &vertices {
            if v as usize >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    vertex: v as u64,
                    vertex_count,
                });
            }
            if !seen.insert(v) {
                return Err(Error::DuplicateObject(v));
            }
        }
        Ok(Self { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, idx: usize) -> VertexId {
        self.vertices[idx]
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Object density `|P| / |V|`.
    pub fn density(&self, vertex_count: usize) -> f64 {
        self.len() as f64 / vertex_count as f64
    }

    pub(crate) fn require_neighbors(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.len() < k + 1 {
            return Err(Error::Config(format!(
                "{} objects cannot have {k} nearest other objects each (need at least {})",
                self.len(),
                k + 1
            )));
        }
        Ok(())
    }
}

/// Reads raw vertex ids, one per line. `#` starts a comment line.
pub fn parse_object_ids<R: BufRead>(input: R) -> Result<Vec<u64>> {
    let mut ids = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let id = trimmed.parse::<u64>().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid vertex id {trimmed:?}"),
        })?;
        ids.push(id);
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(matches!(
            ObjectSet::new(5, vec![1, 3, 1]),
            Err(Error::DuplicateObject(1))
        ));
        assert!(matches!(
            ObjectSet::new(5, vec![5]),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn neighbor_requirement() {
        let p = ObjectSet::new(10, vec![4]).unwrap();
        assert!(p.require_neighbors(1).is_err());
        let p = ObjectSet::new(10, vec![4, 7]).unwrap();
        assert!(p.require_neighbors(1).is_ok());
        assert!(p.require_neighbors(2).is_err());
        assert!(p.require_neighbors(0).is_err());
    }

    #[test]
    fn parses_object_file() {
        let ids = parse_object_ids("# objects\n4\n 10 \n\n12\n".as_bytes()).unwrap();
        assert_eq!(ids, vec![4, 10, 12]);
        assert!(matches!(
            parse_object_ids("4\nx\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
