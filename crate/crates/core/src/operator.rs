//! The normalized Laplacian `I - D^{-1/2} W D^{-1/2}` as a matvec-only
//! operator.
//!
//! Isolated nodes get `(D^{-1/2})_ii = 0`, so their row of the normalized
//! adjacency is empty and they contribute eigenvalue 1 (0.5 once rescaled).

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;

/// Rows per rayon task; below `PAR_MIN_ROWS` the product runs serially.
const PAR_CHUNK: usize = 4096;
const PAR_MIN_ROWS: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    /// Spectrum in `[0, 2]`.
    NormalizedLaplacian,
    /// Normalized Laplacian divided by two; spectrum in `[0, 1]`.
    RescaledNormalizedLaplacian,
}

#[derive(Debug, Clone)]
pub struct SpectralOperator<'g> {
    graph: &'g SparseGraph,
    mode: OperatorMode,
    inv_sqrt_degree: Vec<f64>,
}

impl<'g> SpectralOperator<'g> {
    pub fn new(graph: &'g SparseGraph, mode: OperatorMode) -> Self {
        let inv_sqrt_degree = graph
            .degrees()
            .0
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        Self {
            graph,
            mode,
            inv_sqrt_degree,
        }
    }

    pub fn rescaled(graph: &'g SparseGraph) -> Self {
        Self::new(graph, OperatorMode::RescaledNormalizedLaplacian)
    }

    pub fn graph(&self) -> &'g SparseGraph {
        self.graph
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn inv_sqrt_degree(&self) -> &[f64] {
        &self.inv_sqrt_degree
    }

    fn scale(&self) -> f64 {
        match self.mode {
            OperatorMode::NormalizedLaplacian => 1.0,
            OperatorMode::RescaledNormalizedLaplacian => 0.5,
        }
    }

    /// `y <- A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if n >= PAR_MIN_ROWS {
            y.par_chunks_mut(PAR_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| self.apply_rows(c * PAR_CHUNK, x, chunk));
        } else {
            self.apply_rows(0, x, y);
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n()];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    fn apply_rows(&self, first: usize, x: &[f64], out: &mut [f64]) {
        let g = self.graph;
        let offsets = g.row_offsets();
        let cols = g.col_indices();
        let ws = g.weights();
        let s = &self.inv_sqrt_degree;
        let scale = self.scale();
        for (k, yi) in out.iter_mut().enumerate() {
            let i = first + k;
            let mut acc = 0.0;
            for e in offsets[i]..offsets[i + 1] {
                let j = cols[e] as usize;
                acc += ws[e] * s[j] * x[j];
            }
            *yi = scale * (x[i] - s[i] * acc);
        }
    }

    /// Dense copy of the operator. Intended for small graphs and oracles.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let scale = self.scale();
        let s = &self.inv_sqrt_degree;
        let mut a = DMatrix::<f64>::identity(n, n) * scale;
        for (i, j, w) in self.graph.edges() {
            let v = -scale * s[i] * w * s[j];
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a
    }

    /// All eigenvalues by dense symmetric eigendecomposition, ascending.
    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn single_edge() {
        let g = SparseGraph::from_unweighted(2, [(0, 1)]).unwrap();
        let op = SpectralOperator::new(&g, OperatorMode::NormalizedLaplacian);
        assert_eq!(op.matvec(&[1.0, 0.0]).unwrap(), vec![1.0, -1.0]);
        let half = SpectralOperator::rescaled(&g);
        assert_eq!(half.matvec(&[1.0, 0.0]).unwrap(), vec![0.5, -0.5]);
    }

    #[test]
    fn zero_in_zero_out() {
        let g = SparseGraph::from_unweighted(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let op = SpectralOperator::rescaled(&g);
        assert_eq!(op.matvec(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn complete_graph_spectrum_and_kernel() {
        let k3 = SparseGraph::from_unweighted(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let ev = SpectralOperator::new(&k3, OperatorMode::NormalizedLaplacian).dense_eigenvalues();
        for (got, want) in ev.iter().zip([0.0, 1.5, 1.5]) {
            assert!((got - want).abs() < 1e-12, "{ev:?}");
        }
        let y = SpectralOperator::rescaled(&k3).matvec(&[1.0; 3]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn isolated_nodes_contribute_one() {
        let g = SparseGraph::from_edges(3, [(0, 1, 2.0)]).unwrap();
        let op = SpectralOperator::new(&g, OperatorMode::NormalizedLaplacian);
        assert_eq!(op.inv_sqrt_degree()[2], 0.0);
        assert_eq!(op.matvec(&[0.0, 0.0, 3.0]).unwrap(), vec![0.0, 0.0, 3.0]);
        let ev = op.dense_eigenvalues();
        assert!(
            (ev[0]).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12 && (ev[2] - 2.0).abs() < 1e-12
        );
    }

    #[test]
    fn dimension_mismatch() {
        let g = SparseGraph::from_unweighted(2, [(0, 1)]).unwrap();
        let op = SpectralOperator::rescaled(&g);
        assert!(matches!(
            op.matvec(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn symmetric_on_weighted_graph() {
        let g = SparseGraph::from_edges(
            5,
            [
                (0, 1, 1.0),
                (1, 2, 0.3),
                (2, 3, 2.0),
                (3, 4, 1.5),
                (4, 0, 0.7),
                (1, 3, 1.1),
            ],
        )
        .unwrap();
        let op = SpectralOperator::rescaled(&g);
        let u = [0.3, -1.0, 2.0, 0.5, 0.1];
        let v = [1.0, 0.2, -0.7, 0.4, 3.0];
        let lhs = dot(&u, &op.matvec(&v).unwrap());
        let rhs = dot(&op.matvec(&u).unwrap(), &v);
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
