use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit_graph_spectrum;
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::maxent::{symmetric_kl, EntropicSpectrum, SolverConfig};
use crate::moments::ProbeConfig;

/// Pairwise symmetric KL divergences. Entries involving a graph whose fit
/// failed are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub moments_used: usize,
    /// Fit error per graph, `None` when the fit succeeded.
    pub failures: Vec<Option<String>>,
}

impl SimilarityMatrix {
    /// Builds the matrix from already fitted spectra.
    pub fn from_spectra(
        labels: Vec<String>,
        spectra: &[std::result::Result<EntropicSpectrum, String>],
        moments_used: usize,
    ) -> Result<Self> {
        let k = spectra.len();
        if labels.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: labels.len(),
            });
        }
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        let entries: Vec<Option<f64>> = pairs
            .par_iter()
            .map(|&(i, j)| match (&spectra[i], &spectra[j]) {
                (Ok(p), Ok(q)) => symmetric_kl(p, q).ok(),
                _ => None,
            })
            .collect();
        let mut values = vec![vec![None; k]; k];
        for (i, row) in values.iter_mut().enumerate() {
            row[i] = Some(0.0);
        }
        for (&(i, j), v) in pairs.iter().zip(entries) {
            values[i][j] = v;
            values[j][i] = v;
        }
        let failures = spectra.iter().map(|s| s.as_ref().err().cloned()).collect();
        Ok(Self {
            labels,
            values,
            moments_used,
            failures,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    /// Square CSV with a header row of labels; missing entries are `NA`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "label,{}", self.labels.join(","))?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            let cells: Vec<String> = row
                .iter()
                .map(|v| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.7e}")))
                .collect();
            writeln!(out, "{label},{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fits a Chebyshev-basis spectrum to every graph and compares all pairs.
/// A failed fit marks its row and column missing instead of aborting.
pub fn similarity_matrix(
    labels: Vec<String>,
    graphs: &[SparseGraph],
    m: usize,
    cfg: &ProbeConfig,
    solver: &SolverConfig,
) -> Result<SimilarityMatrix> {
    if graphs.len() < 2 {
        return Err(Error::InvalidArgument(
            "at least two graphs are required".into(),
        ));
    }
    let spectra: Vec<_> = graphs
        .par_iter()
        .map(|g| {
            fit_graph_spectrum(g, m, Basis::ChebyshevShifted, cfg, solver)
                .map_err(|e| e.to_string())
        })
        .collect();
    SimilarityMatrix::from_spectra(labels, &spectra, m)
}
