//! Maximum-entropy spectral densities of large sparse graphs.
//!
//! Moments of the rescaled normalized Laplacian are estimated by stochastic
//! trace estimation ([`moments`]), turned into a smooth density by a
//! maximum-entropy fit ([`maxent`]), and compared or mined for structure
//! ([`analysis`]). [`baselines`] holds the Dirac-mixture methods used for
//! comparison and [`generators`] the synthetic inputs.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baselines;
pub mod basis;
pub mod error;
pub mod generators;
pub mod graph;
pub mod maxent;
pub mod moments;
pub mod operator;
pub mod quadrature;

pub use analysis::{
    estimate_clusters, fit_graph_spectrum, perturbation_bound, similarity_matrix, ClusterEstimate,
    SimilarityMatrix,
};
pub use baselines::{DiracSpectrum, Kernel, SmoothedSpectrum};
pub use basis::Basis;
pub use error::{Error, Result};
pub use generators::{generate, Model, ModelSpec, SemicircleSpec};
pub use graph::{DegreeVector, GraphBuilder, SparseGraph};
pub use maxent::{maxent_fit, EntropicSpectrum, SolverConfig};
pub use moments::{ste_moments, MomentVector, ProbeConfig};
pub use operator::{OperatorMode, SpectralOperator};
pub use quadrature::GaussLegendre;
