use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{OperatorMode, SpectralOperator};

/// Atoms this far outside `[0, 1]` are treated as rounding and clamped.
const DOMAIN_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiracSource {
    ExactEig,
    Lanczos,
    Synthetic,
}

/// Weighted point masses `sum_i w_i delta(lambda - lambda_i)` on `[0, 1]`,
/// sorted by location, weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracSpectrum {
    atoms: Vec<(f64, f64)>,
    source: DiracSource,
}

impl DiracSpectrum {
    /// Validates and sorts `(location, weight)` pairs. Zero-weight atoms are
    /// dropped.
    pub fn new(atoms: Vec<(f64, f64)>, source: DiracSource) -> Result<Self> {
        let mut kept = Vec::with_capacity(atoms.len());
        for (lambda, w) in atoms {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "atom weight {w} is invalid"
                )));
            }
            if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&lambda) {
                return Err(Error::OutOfDomain(lambda));
            }
            if w > 0.0 {
                kept.push((lambda.clamp(0.0, 1.0), w));
            }
        }
        let sum: f64 = kept.iter().map(|a| a.1).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized { sum });
        }
        kept.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            atoms: kept,
            source,
        })
    }

    /// Builds a spectrum without any validation. Meant for exercising error
    /// paths of consumers.
    pub fn from_atoms_unchecked(atoms: Vec<(f64, f64)>, source: DiracSource) -> Self {
        Self { atoms, source }
    }

    /// Equal-weight atoms at the given eigenvalues.
    pub fn from_eigenvalues(eigenvalues: &[f64], source: DiracSource) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("no eigenvalues".into()));
        }
        let w = 1.0 / eigenvalues.len() as f64;
        Self::new(eigenvalues.iter().map(|&l| (l, w)).collect(), source)
    }

    /// Exact spectrum of a rescaled operator by dense eigendecomposition.
    pub fn exact(op: &SpectralOperator<'_>) -> Result<Self> {
        if op.mode() != OperatorMode::RescaledNormalizedLaplacian {
            return Err(Error::NotRescaled);
        }
        Self::from_eigenvalues(&op.dense_eigenvalues(), DiracSource::ExactEig)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn source(&self) -> DiracSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `sum_i w_i lambda_i^k / sum_i w_i`.
    pub fn power_moment(&self, k: u32) -> f64 {
        let total: f64 = self.atoms.iter().map(|a| a.1).sum();
        let s: f64 = self.atoms.iter().map(|&(l, w)| w * l.powi(k as i32)).sum();
        s / total
    }

    /// Fraction of mass in each of `bins` equal-width bins over `[0, 1]`.
    pub fn histogram(&self, bins: usize) -> Vec<f64> {
        let mut h = vec![0.0; bins];
        for &(l, w) in &self.atoms {
            let b = ((l * bins as f64) as usize).min(bins - 1);
            h[b] += w;
        }
        h
    }

    /// CSV with header `lambda,weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lambda,weight")?;
        for &(l, w) in &self.atoms {
            writeln!(out, "{l:.7e},{w:.7e}")?;
        }
        Ok(())
    }
}

/// Result of comparing two Dirac mixtures with the KL divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiracDivergence {
    Finite(f64),
    Infinite,
}

/// Atoms closer than this are considered the same location.
pub const ATOM_MATCH_TOL: f64 = 1e-10;

fn coalesce(atoms: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for &(l, w) in atoms {
        match out.last_mut() {
            Some(last) if l - last.0 <= ATOM_MATCH_TOL => last.1 += w,
            _ => out.push((l, w)),
        }
    }
    out
}

/// Discrete KL divergence `KL(p || q)`, which is infinite as soon as `p`
/// puts mass where `q` has none.
pub fn dirac_divergence_pathology(p: &DiracSpectrum, q: &DiracSpectrum) -> DiracDivergence {
    let p = coalesce(p.atoms());
    let q = coalesce(q.atoms());
    let mut kl = 0.0;
    for &(l, wp) in &p {
        let start = q.partition_point(|a| a.0 < l - ATOM_MATCH_TOL);
        let wq: f64 = q[start..]
            .iter()
            .take_while(|a| a.0 <= l + ATOM_MATCH_TOL)
            .map(|a| a.1)
            .sum();
        if wq == 0.0 {
            return DiracDivergence::Infinite;
        }
        kl += wp * (wp / wq).ln();
    }
    DiracDivergence::Finite(kl)
}
