//! Spy-plot output for permuted adjacency matrices.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::csr::{CsrGraph, NodePermutation};
use crate::error::{Error, Result};

pub const DEFAULT_SPY_SIDE: usize = 1024;

#[derive(Debug, Clone)]
pub struct SpyOutput {
    pub csv: Option<PathBuf>,
    pub pgm: Option<PathBuf>,
    /// Maximum image side length in pixels.
    pub side: usize,
}

/// Non-zero coordinates `(r, c)` of the permuted matrix, sorted row-major.
pub fn spy_coordinates(graph: &CsrGraph, perm: &NodePermutation) -> Result<Vec<(usize, usize)>> {
    if perm.len() != graph.num_nodes() {
        return Err(Error::Argument(format!(
            "permutation of {} nodes for a graph of {}",
            perm.len(),
            graph.num_nodes()
        )));
    }
    let pos = perm.positions();
    let mut coords: Vec<(usize, usize)> = Vec::with_capacity(graph.nnz());
    for u in 0..graph.num_nodes() {
        for &v in graph.neighbors(u) {
            coords.push((pos[u], pos[v]));
        }
    }
    coords.sort_unstable();
    Ok(coords)
}

/// Max-pools the coordinates onto a `side x side` grid (side clamped to the
/// matrix dimension). Returns the grid side and 8-bit pixels, 0 where any
/// non-zero falls in the cell and 255 elsewhere.
pub fn rasterize(n: usize, coords: &[(usize, usize)], side: usize) -> (usize, Vec<u8>) {
    let side = side.min(n).max(1);
    let mut pixels = vec![255u8; side * side];
    if n == 0 {
        return (side, pixels);
    }
    for &(r, c) in coords {
        let pr = r * side / n;
        let pc = c * side / n;
        pixels[pr * side + pc] = 0;
    }
    (side, pixels)
}

pub fn write_spy_csv(coords: &[(usize, usize)], out: impl Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "row,col")?;
    for (r, c) in coords {
        writeln!(out, "{r},{c}")?;
    }
    out.flush()
}

pub fn write_pgm(side: usize, pixels: &[u8], out: impl Write) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    write!(out, "P5\n{side} {side}\n255\n")?;
    out.write_all(pixels)?;
    out.flush()
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

pub fn emit_spy(graph: &CsrGraph, perm: &NodePermutation, output: &SpyOutput) -> Result<()> {
    let coords = spy_coordinates(graph, perm)?;
    if let Some(path) = &output.csv {
        write_spy_csv(&coords, create(path)?)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    if let Some(path) = &output.pgm {
        let (side, pixels) = rasterize(graph.num_nodes(), &coords, output.side);
        write_pgm(side, &pixels, create(path)?)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    Ok(())
}
