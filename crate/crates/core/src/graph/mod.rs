//! Undirected weighted graphs in compressed sparse row form.
//!
//! A [`SparseGraph`] stores every undirected edge twice (once per endpoint),
//! with column indices sorted and unique within each row. Self-loops are
//! never stored and every stored weight is strictly positive.

mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{parse_edge_list, read_binary, read_edge_list, write_binary, write_edge_list};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    weights: Vec<f64>,
    /// External id of each dense node index.
    node_ids: Vec<u64>,
}

/// Per-node weighted degree `d_i = sum_j w_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for DegreeVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Accumulates edges with arbitrary external node ids and produces a
/// [`SparseGraph`].
///
/// External ids are relabeled densely in first-seen order. Repeated edges
/// (in either direction) collapse to the maximum weight seen; self-loops
/// register their node but are otherwise dropped.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    index: HashMap<u64, u32>,
    node_ids: Vec<u64>,
    edges: Vec<(u32, u32, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node without adding an edge. Returns its dense index.
    pub fn add_node(&mut self, id: u64) -> u32 {
        if let Some(&ix) = self.index.get(&id) {
            return ix;
        }
        let ix = u32::try_from(self.node_ids.len()).expect("more than u32::MAX nodes");
        self.index.insert(id, ix);
        self.node_ids.push(id);
        ix
    }

    /// Adds an undirected edge. A zero weight registers both nodes but stores
    /// no edge.
    pub fn add_edge(&mut self, a: u64, b: u64, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "edge ({a}, {b}) has invalid weight {weight}"
            )));
        }
        let u = self.add_node(a);
        let v = self.add_node(b);
        if u != v && weight > 0.0 {
            self.edges.push((u, v, weight));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn build(self) -> Result<SparseGraph> {
        let n = self.node_ids.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut directed = Vec::with_capacity(self.edges.len() * 2);
        for &(u, v, w) in &self.edges {
            directed.push((u, v, w));
            directed.push((v, u, w));
        }
        directed.sort_unstable_by_key(|e| (e.0, e.1));

        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices: Vec<u32> = Vec::with_capacity(directed.len());
        let mut weights: Vec<f64> = Vec::with_capacity(directed.len());
        let mut last: Option<(u32, u32)> = None;
        for (u, v, w) in directed {
            if last == Some((u, v)) {
                let slot = weights.last_mut().expect("previous entry exists");
                *slot = slot.max(w);
                continue;
            }
            last = Some((u, v));
            row_offsets[u as usize + 1] += 1;
            col_indices.push(v);
            weights.push(w);
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparseGraph {
            row_offsets,
            col_indices,
            weights,
            node_ids: self.node_ids,
        })
    }
}

impl SparseGraph {
    /// Builds a graph on nodes `0..n` (external ids equal to the indices).
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut builder = GraphBuilder::new();
        for i in 0..n {
            builder.add_node(i as u64);
        }
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            builder.add_edge(a as u64, b as u64, w)?;
        }
        builder.build()
    }

    /// Unweighted convenience wrapper over [`SparseGraph::from_edges`].
    pub fn from_unweighted<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, edges.into_iter().map(|(a, b)| (a, b, 1.0)))
    }

    pub(crate) fn from_raw_parts(
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        weights: Vec<f64>,
        node_ids: Vec<u64>,
    ) -> Result<Self> {
        let g = SparseGraph {
            row_offsets,
            col_indices,
            weights,
            node_ids,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks every structural invariant: offsets, sorted unique columns,
    /// positive weights, no self-loops and symmetry.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_ids.len();
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if self.row_offsets.len() != n + 1 || self.row_offsets[0] != 0 {
            return bad("row offsets have the wrong shape".into());
        }
        if *self.row_offsets.last().unwrap() != self.col_indices.len()
            || self.col_indices.len() != self.weights.len()
        {
            return bad("row offsets disagree with column storage".into());
        }
        for i in 0..n {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            if lo > hi {
                return bad(format!("row {i} has decreasing offsets"));
            }
            let cols = &self.col_indices[lo..hi];
            for (k, &c) in cols.iter().enumerate() {
                if c as usize >= n {
                    return bad(format!("row {i} references node {c}"));
                }
                if c as usize == i {
                    return bad(format!("self-loop at node {i}"));
                }
                if k > 0 && cols[k - 1] >= c {
                    return bad(format!("row {i} columns not strictly increasing"));
                }
                let w = self.weights[lo + k];
                if !(w > 0.0 && w.is_finite()) {
                    return bad(format!("edge ({i}, {c}) has weight {w}"));
                }
                if self.weight(c as usize, i) != Some(w) {
                    return bad(format!("edge ({i}, {c}) has no symmetric partner"));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    /// Number of stored directed entries (twice the undirected edge count).
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.nnz() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_ids(&self) -> &[u64] {
        &self.node_ids
    }

    /// Neighbor indices and weights of node `i`.
    pub fn neighbors(&self, i: usize) -> (&[u32], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.weights[lo..hi])
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, ws) = self.neighbors(i);
        cols.binary_search(&(j as u32)).ok().map(|k| ws[k])
    }

    /// Unweighted degree (neighbor count) of node `i`.
    pub fn neighbor_count(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(
            (0..self.n())
                .map(|i| self.neighbors(i).1.iter().sum())
                .collect(),
        )
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |i| {
            let (cols, ws) = self.neighbors(i);
            cols.iter()
                .zip(ws)
                .filter(move |(&j, _)| (j as usize) > i)
                .map(move |(&j, &w)| (i, j as usize, w))
        })
    }

    /// Connected-component label of every node, labels numbered in order of
    /// their smallest member. Returns `(component_count, labels)`.
    pub fn connected_components(&self) -> (usize, Vec<usize>) {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u).0 {
                    let v = v as usize;
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Disjoint union: nodes of `other` are appended after the nodes of
    /// `self`, with external ids offset past the largest id of `self`.
    pub fn disjoint_union(&self, other: &SparseGraph) -> SparseGraph {
        let shift = self.n();
        let id_shift = self.node_ids.iter().max().map_or(0, |m| m + 1);
        let mut row_offsets = self.row_offsets.clone();
        let base = self.nnz();
        row_offsets.extend(other.row_offsets[1..].iter().map(|&o| o + base));
        let mut col_indices = self.col_indices.clone();
        col_indices.extend(other.col_indices.iter().map(|&c| c + shift as u32));
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        let mut node_ids = self.node_ids.clone();
        node_ids.extend(other.node_ids.iter().map(|&id| id + id_shift));
        SparseGraph {
            row_offsets,
            col_indices,
            weights,
            node_ids,
        }
    }
}
