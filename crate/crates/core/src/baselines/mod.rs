//! Comparison methods: Dirac-mixture spectra from exact eigendecomposition
//! or stochastic Lanczos quadrature, and their kernel-smoothed densities.

mod dirac;
mod lanczos;
mod smoothing;

pub use dirac::{
    dirac_divergence_pathology, DiracDivergence, DiracSource, DiracSpectrum, ATOM_MATCH_TOL,
};
pub use lanczos::{lanczos_quadrature, lanczos_spectrum, lanczos_tridiagonal, BREAKDOWN_TOL};
pub(crate) use smoothing::unit_grid;
pub use smoothing::{smooth, smoothed_moment_bias, Kernel, SmoothedSpectrum};
