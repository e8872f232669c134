//! Edge-list and feature-file formats.
//!
//! Edge lists are line-oriented text: `src dst [weight]` per line, `#`
//! starts a comment, weight defaults to 1.0. Features live in a sidecar
//! binary file: an 8-byte header (`u32` rows, `u32` dim, little-endian)
//! followed by row-major little-endian `f32` values.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{CooEntry, FeatureMatrix, Graph};

/// Loads a graph from an edge-list file plus its feature sidecar.
///
/// The feature file defines the vertex count. With `symmetrize` set, every
/// edge whose reverse is absent gets one appended (same weight), so an
/// undirected input becomes properly directed storage.
pub fn load_graph(
    edge_path: impl AsRef<Path>,
    feature_path: impl AsRef<Path>,
    symmetrize: bool,
) -> Result<Graph> {
    let features = read_features(feature_path)?;
    let mut edges = parse_edge_list(BufReader::new(File::open(edge_path)?))?;
    if symmetrize {
        let present: HashSet<(u32, u32)> = edges.iter().map(|e| (e.src, e.dst)).collect();
        let mut extra = Vec::new();
        for e in &edges {
            if e.src != e.dst && !present.contains(&(e.dst, e.src)) {
                extra.push(CooEntry::new(e.dst, e.src, e.val));
            }
        }
        edges.extend(extra);
    }
    Graph::new(features.rows(), edges, features)
}

fn parse_edge_list(reader: impl BufRead) -> Result<Vec<CooEntry>> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let src = parse_field(fields.next(), "src", lineno)?;
        let dst = parse_field(fields.next(), "dst", lineno)?;
        let val = match fields.next() {
            Some(w) => w
                .parse::<f32>()
                .map_err(|_| Error::Parse(format!("line {}: bad weight {w:?}", lineno + 1)))?,
            None => 1.0,
        };
        if fields.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected `src dst [weight]`",
                lineno + 1
            )));
        }
        edges.push(CooEntry::new(src, dst, val));
    }
    Ok(edges)
}

fn parse_field(field: Option<&str>, name: &str, lineno: usize) -> Result<u32> {
    field
        .ok_or_else(|| Error::Parse(format!("line {}: missing {name}", lineno + 1)))?
        .parse::<u32>()
        .map_err(|_| Error::Parse(format!("line {}: bad {name}", lineno + 1)))
}

/// Writes the graph's edges as `src dst weight` lines.
pub fn write_edge_list(path: impl AsRef<Path>, graph: &Graph) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# vertices {} edges {}",
        graph.num_vertices,
        graph.edges.len()
    )?;
    for e in &graph.edges {
        writeln!(w, "{} {} {}", e.src, e.dst, e.val)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a feature matrix in the binary sidecar format.
pub fn write_features(path: impl AsRef<Path>, features: &FeatureMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(features.rows() as u32).to_le_bytes())?;
    w.write_all(&(features.dim() as u32).to_le_bytes())?;
    for v in features.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a feature matrix from the binary sidecar format.
pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let rows = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let mut payload = vec![0u8; rows * dim * 4];
    r.read_exact(&mut payload)?;
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::from_data(rows, dim, data)
}
