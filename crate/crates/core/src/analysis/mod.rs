//! Applications of fitted spectra: cluster counting, edge-perturbation
//! bounds, graph similarity and random-graph model selection.

mod clusters;
mod inference;
mod perturbation;
mod similarity;

pub use clusters::{
    estimate_clusters, ClusterEstimate, CLUSTER_GRID_POINTS, DEFAULT_RELATIVE_ETA,
    VALLEY_PROMINENCE,
};
pub use inference::{
    candidate_model, classify_network, infer_parameter, Classification, Evaluation, Inference,
    ModelFamily, SearchConfig,
};
pub use perturbation::{perturbation_bound, PerturbationBound};
pub use similarity::{similarity_matrix, SimilarityMatrix};

use crate::basis::Basis;
use crate::error::Result;
use crate::graph::SparseGraph;
use crate::maxent::{maxent_fit, EntropicSpectrum, SolverConfig};
use crate::moments::{ste_moments, ProbeConfig};
use crate::operator::SpectralOperator;

/// Estimates `m` moments of the rescaled normalized Laplacian of `g` and
/// fits the maximum-entropy density to them.
pub fn fit_graph_spectrum(
    g: &SparseGraph,
    m: usize,
    basis: Basis,
    cfg: &ProbeConfig,
    solver: &SolverConfig,
) -> Result<EntropicSpectrum> {
    let op = SpectralOperator::rescaled(g);
    let mv = ste_moments(&op, cfg, m, basis)?;
    maxent_fit(&mv, solver)
}
