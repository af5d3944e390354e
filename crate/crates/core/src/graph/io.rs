//! SNAP edge-list text and the binary CSR cache.
//!
//! Binary cache layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size          field
//! 0       8             magic  b"EGSCSR\0\0"
//! 8       4             version (u32, currently 1)
//! 12      4             reserved, zero
//! 16      8             n      (u64, node count)
//! 24      8             nnz    (u64, stored directed entries)
//! 32      8 * (n + 1)   row offsets (u64)
//! ..      4 * nnz       column indices (u32)
//! ..      8 * nnz       weights (f64)
//! ..      8 * n         external node ids (u64)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GraphBuilder, SparseGraph};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"EGSCSR\0\0";
const VERSION: u32 = 1;

/// Parses a SNAP-style edge list.
///
/// Lines starting with `#` are comments and blank lines are skipped. Each
/// data line holds two integer node ids and an optional positive weight.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<SparseGraph> {
    let mut builder = GraphBuilder::new();
    for (ix, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = ix + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let mut node = |name: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| err(format!("missing {name} node id")))?;
            tok.parse::<u64>()
                .map_err(|_| err(format!("invalid node id {tok:?}")))
        };
        let a = node("source")?;
        let b = node("target")?;
        let weight = match fields.next() {
            None => 1.0,
            Some(tok) => tok
                .parse::<f64>()
                .map_err(|_| err(format!("invalid weight {tok:?}")))?,
        };
        if let Some(extra) = fields.next() {
            return Err(err(format!("unexpected field {extra:?}")));
        }
        builder
            .add_edge(a, b, weight)
            .map_err(|e| err(e.to_string()))?;
    }
    builder.build()
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<SparseGraph> {
    parse_edge_list(BufReader::new(File::open(path)?))
}

/// Writes `g` as a SNAP edge list that parses back to an identical graph.
///
/// Node `k`'s block lists its lower-indexed neighbours as `j k` lines, so
/// every node first appears in its own block and the dense labeling is
/// reproduced on re-parse. A node with no lower-indexed neighbour is
/// declared with a self-loop line, which the parser drops. Unit weights are
/// omitted; other weights are written in shortest round-trip form.
pub fn write_edge_list<W: Write>(g: &SparseGraph, writer: W) -> Result<()> {
    let mut out = BufWriter::new(writer);
    writeln!(out, "# Undirected graph")?;
    writeln!(out, "# Nodes: {} Edges: {}", g.n(), g.num_edges())?;
    let ids = g.node_ids();
    for k in 0..g.n() {
        let (cols, ws) = g.neighbors(k);
        let lower = cols.partition_point(|&c| (c as usize) < k);
        if lower == 0 {
            writeln!(out, "{} {}", ids[k], ids[k])?;
            continue;
        }
        for (&j, &w) in cols[..lower].iter().zip(&ws[..lower]) {
            if w == 1.0 {
                writeln!(out, "{} {}", ids[j as usize], ids[k])?;
            } else {
                writeln!(out, "{} {} {}", ids[j as usize], ids[k], w)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(g: &SparseGraph, writer: W) -> Result<()> {
    let mut out = BufWriter::new(writer);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    out.write_all(&(g.nnz() as u64).to_le_bytes())?;
    for &o in g.row_offsets() {
        out.write_all(&(o as u64).to_le_bytes())?;
    }
    for &c in g.col_indices() {
        out.write_all(&c.to_le_bytes())?;
    }
    for &w in g.weights() {
        out.write_all(&w.to_le_bytes())?;
    }
    for &id in g.node_ids() {
        out.write_all(&id.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(reader: R) -> Result<SparseGraph> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let _reserved = read_u32(&mut r)?;
    let n = usize::try_from(read_u64(&mut r)?).map_err(|_| Error::Cache("n too large".into()))?;
    let nnz =
        usize::try_from(read_u64(&mut r)?).map_err(|_| Error::Cache("nnz too large".into()))?;
    let row_offsets = (0..=n)
        .map(|_| read_u64(&mut r).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let col_indices = (0..nnz)
        .map(|_| read_u32(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let weights = (0..nnz)
        .map(|_| read_u64(&mut r).map(f64::from_bits))
        .collect::<Result<Vec<_>>>()?;
    let node_ids = (0..n)
        .map(|_| read_u64(&mut r))
        .collect::<Result<Vec<_>>>()?;
    SparseGraph::from_raw_parts(row_offsets, col_indices, weights, node_ids)
        .map_err(|e| Error::Cache(e.to_string()))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
