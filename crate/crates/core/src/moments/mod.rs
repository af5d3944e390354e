//! Spectral moments: stochastic trace estimation, exact moments of Dirac
//! mixtures and exact changes of polynomial basis.

pub(crate) mod convert;
mod ste;

use serde::{Deserialize, Serialize};

pub use crate::basis::Basis;
pub use convert::{basis_convert, MAX_CONVERSION_ORDER};
pub use ste::{exact_moments, ste_moments, ProbeConfig, ProbeDistribution, ProbeNormalization};

/// Moments `mu_1..mu_m` of a spectral density on `[0, 1]` in a given basis.
/// `mu_0 = 1` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub basis: Basis,
    pub m: usize,
    /// Probe count; zero for moments that were not estimated.
    #[serde(rename = "d")]
    pub probes_used: usize,
    pub seed: Option<u64>,
    pub values: Vec<f64>,
    /// Per-moment sample variance across probes. Empty when unknown.
    #[serde(rename = "variance")]
    pub estimator_variance: Vec<f64>,
}

impl MomentVector {
    /// Moments known exactly (analytic or from an explicit spectrum).
    pub fn exact(basis: Basis, values: Vec<f64>) -> Self {
        Self {
            basis,
            m: values.len(),
            probes_used: 0,
            seed: None,
            values,
            estimator_variance: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// First `m` moments.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.values.len());
        let mut out = self.clone();
        out.values.truncate(m);
        out.estimator_variance.truncate(m);
        out.m = m;
        out
    }

    /// Standard error of each estimated moment, `sqrt(var / d)`.
    pub fn standard_errors(&self) -> Vec<f64> {
        let d = self.probes_used.max(1) as f64;
        self.estimator_variance
            .iter()
            .map(|v| (v / d).sqrt())
            .collect()
    }

    /// Whether the values lie in the range a probability measure on `[0, 1]`
    /// allows: `[0, 1]` and non-increasing for monomials, `[-1, 1]` for
    /// shifted Chebyshev polynomials.
    pub fn within_bounds(&self, tol: f64) -> bool {
        match self.basis {
            Basis::Power => {
                self.values.iter().all(|&v| (-tol..=1.0 + tol).contains(&v))
                    && self.values.windows(2).all(|w| w[1] <= w[0] + tol)
            }
            Basis::ChebyshevShifted => self.values.iter().all(|v| v.abs() <= 1.0 + tol),
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
