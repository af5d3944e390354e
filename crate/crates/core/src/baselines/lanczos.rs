//! Stochastic Lanczos quadrature: Ritz values weighted by the squared first
//! components of the tridiagonal eigenvectors.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::dirac::{DiracSource, DiracSpectrum};
use crate::error::{Error, Result};
use crate::moments::ProbeConfig;
use crate::operator::SpectralOperator;

/// Lanczos stops early once the next off-diagonal falls below this.
pub const BREAKDOWN_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tridiagonal coefficients from `steps` Lanczos iterations with full
/// reorthogonalization, started at `start / |start|`.
///
/// Returns `(alpha, beta)` with `beta.len() == alpha.len() - 1`; fewer than
/// `steps` diagonals come back when the Krylov space is exhausted.
pub fn lanczos_tridiagonal(
    op: &SpectralOperator<'_>,
    start: &[f64],
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = op.n();
    if start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: start.len(),
        });
    }
    if steps == 0 || steps > n {
        return Err(Error::InvalidArgument(format!(
            "Lanczos steps must be in 1..={n}, got {steps}"
        )));
    }
    let norm = dot(start, start).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero start vector".into()));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    basis.push(start.iter().map(|x| x / norm).collect());
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; n];
    loop {
        let k = basis.len() - 1;
        op.matvec_into(&basis[k], &mut w)?;
        let a = dot(&basis[k], &w);
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&basis[k]) {
            *wi -= a * qi;
        }
        if k > 0 {
            let b = beta[k - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[k - 1]) {
                *wi -= b * qi;
            }
        }
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        if alpha.len() == steps {
            break;
        }
        let b = dot(&w, &w).sqrt();
        if b < BREAKDOWN_TOL {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Ok((alpha, beta))
}

/// Gauss quadrature nodes and weights of the spectral measure seen from
/// `start`: Ritz values and squared first eigenvector components.
pub fn lanczos_quadrature(
    op: &SpectralOperator<'_>,
    start: &[f64],
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let (alpha, beta) = lanczos_tridiagonal(op, start, steps)?;
    let s = alpha.len();
    let mut t = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        t[(i, i)] = alpha[i];
        if i + 1 < s {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut atoms: Vec<(f64, f64)> = (0..s)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(atoms)
}

/// Averages single-probe Lanczos quadratures over `cfg.probes` probes. The
/// merged spectrum is the union of all atoms with weights divided by the
/// probe count.
pub fn lanczos_spectrum(
    op: &SpectralOperator<'_>,
    steps: usize,
    cfg: &ProbeConfig,
) -> Result<DiracSpectrum> {
    if cfg.probes == 0 {
        return Err(Error::InvalidArgument(
            "probe count must be at least 1".into(),
        ));
    }
    let n = op.n();
    let per_probe = (0..cfg.probes)
        .into_par_iter()
        .map(|j| lanczos_quadrature(op, &cfg.probe(j, n), steps))
        .collect::<Result<Vec<_>>>()?;
    let d = cfg.probes as f64;
    let mut atoms: Vec<(f64, f64)> = per_probe
        .into_iter()
        .flatten()
        .map(|(l, w)| (l, w / d))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    DiracSpectrum::new(atoms, DiracSource::Lanczos)
}
