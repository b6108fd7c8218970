//! Whitespace-separated edge-list ingestion.
//!
//! One `u v` pair per line. Blank lines and lines starting with `#` or `%`
//! are ignored. Input may be directed, duplicated or contain self-loops; the
//! result is always a normalized undirected [`CsrGraph`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use super::csr::{CsrGraph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Ids in the file start at 1.
    pub one_indexed: bool,
    /// Declared node count; ids at or above it are a range error.
    /// Defaults to `max id + 1`.
    pub num_nodes: Option<usize>,
}

/// Maps compacted dense ids back to the ids found in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    pub original: Vec<u64>,
}

struct RawEdge {
    u: u64,
    v: u64,
    line: usize,
}

fn parse_lines<R: Read>(reader: R, path: &Path, one_indexed: bool) -> Result<Vec<RawEdge>> {
    let mut edges = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with('%') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("expected two node ids, found {body:?}"),
            });
        };
        let parse = |s: &str| -> Result<u64> {
            let id: u64 = s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("{s:?} is not a non-negative integer"),
            })?;
            if one_indexed {
                id.checked_sub(1).ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: "id 0 in a one-indexed file".into(),
                })
            } else {
                Ok(id)
            }
        };
        edges.push(RawEdge {
            u: parse(a)?,
            v: parse(b)?,
            line: lineno,
        });
    }
    Ok(edges)
}

/// Parses an edge list from any reader. `path` is used for error messages only.
pub fn read_edge_list<R: Read>(reader: R, path: &Path, opts: &IngestOptions) -> Result<CsrGraph> {
    let raw = parse_lines(reader, path, opts.one_indexed)?;
    let max_id = raw.iter().map(|e| e.u.max(e.v)).max();
    let num_nodes = match (opts.num_nodes, max_id) {
        (Some(n), _) => n,
        (None, Some(m)) => usize::try_from(m + 1)
            .map_err(|_| Error::Capacity(format!("node id {m} does not fit in memory")))?,
        (None, None) => 0,
    };
    let mut edges = Vec::with_capacity(raw.len());
    for e in raw {
        for id in [e.u, e.v] {
            if id >= num_nodes as u64 {
                return Err(Error::Range {
                    id,
                    num_nodes,
                    line: e.line,
                });
            }
        }
        edges.push((e.u as NodeId, e.v as NodeId));
    }
    CsrGraph::from_edges(num_nodes, edges)
}

pub fn load_edge_list(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<CsrGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_edge_list(file, path, opts)
}

/// Loads an edge list whose ids may be sparse, renumbering them densely in
/// order of first appearance.
pub fn load_edge_list_compacted(
    path: impl AsRef<Path>,
    opts: &IngestOptions,
) -> Result<(CsrGraph, IdMap)> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let file =
        File::open(&path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let raw = parse_lines(file, &path, opts.one_indexed)?;
    let mut dense: HashMap<u64, NodeId> = HashMap::new();
    let mut original = Vec::new();
    let mut intern = |id: u64| -> NodeId {
        *dense.entry(id).or_insert_with(|| {
            original.push(id);
            original.len() - 1
        })
    };
    let edges: Vec<(NodeId, NodeId)> = raw.iter().map(|e| (intern(e.u), intern(e.v))).collect();
    let num_nodes = opts.num_nodes.unwrap_or(original.len()).max(original.len());
    let graph = CsrGraph::from_edges(num_nodes, edges)?;
    Ok((graph, IdMap { original }))
}

/// Writes each undirected edge once as `u v`.
pub fn write_edge_list(graph: &CsrGraph, mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(
        out,
        "# nodes {} edges {}",
        graph.num_nodes(),
        graph.num_edges()
    )?;
    for (u, v) in graph.undirected_edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
