use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MomentVector;
use crate::baselines::DiracSpectrum;
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::operator::{OperatorMode, SpectralOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeDistribution {
    Gaussian,
    Rademacher,
}

/// How each quadratic form `v^T f(X) v` is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeNormalization {
    /// Divide by `v^T v`. Every probe then yields the moments of a
    /// probability measure, so averaged moments are always feasible.
    SelfNormalized,
    /// Divide by `n`, the plain Hutchinson estimator.
    Dimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub probes: usize,
    pub distribution: ProbeDistribution,
    pub seed: u64,
    pub normalization: ProbeNormalization,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            probes: 100,
            distribution: ProbeDistribution::Gaussian,
            seed: 0,
            normalization: ProbeNormalization::SelfNormalized,
        }
    }
}

impl ProbeConfig {
    pub fn new(probes: usize, seed: u64) -> Self {
        Self {
            probes,
            seed,
            ..Self::default()
        }
    }

    pub fn with_distribution(mut self, distribution: ProbeDistribution) -> Self {
        self.distribution = distribution;
        self
    }

    pub fn with_normalization(mut self, normalization: ProbeNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// Probe vector `index` of length `n`. Each probe has its own ChaCha
    /// stream, so probes do not depend on evaluation order.
    pub fn probe(&self, index: usize, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        match self.distribution {
            ProbeDistribution::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            ProbeDistribution::Rademacher => (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.probes == 0 {
            return Err(Error::InvalidArgument(
                "probe count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Estimates `mu_i = (1/n) Tr phi_i(X)`, `i = 1..m`, by averaging probe
/// quadratic forms. Cost is `O(d * m * nnz)`.
pub fn ste_moments(
    op: &SpectralOperator<'_>,
    cfg: &ProbeConfig,
    m: usize,
    basis: Basis,
) -> Result<MomentVector> {
    if op.mode() != OperatorMode::RescaledNormalizedLaplacian {
        return Err(Error::NotRescaled);
    }
    if m == 0 {
        return Err(Error::InvalidArgument(
            "moment order must be at least 1".into(),
        ));
    }
    cfg.validate()?;

    let samples = (0..cfg.probes)
        .into_par_iter()
        .map(|j| probe_moments(op, cfg, j, m, basis))
        .collect::<Result<Vec<_>>>()?;

    let d = samples.len() as f64;
    let mut values = vec![0.0; m];
    for s in &samples {
        for (acc, v) in values.iter_mut().zip(s) {
            *acc += v;
        }
    }
    values.iter_mut().for_each(|v| *v /= d);
    let estimator_variance = (0..m)
        .map(|i| {
            if samples.len() < 2 {
                return 0.0;
            }
            let ss: f64 = samples.iter().map(|s| (s[i] - values[i]).powi(2)).sum();
            ss / (d - 1.0)
        })
        .collect();

    Ok(MomentVector {
        basis,
        m,
        probes_used: cfg.probes,
        seed: Some(cfg.seed),
        values,
        estimator_variance,
    })
}

fn probe_moments(
    op: &SpectralOperator<'_>,
    cfg: &ProbeConfig,
    index: usize,
    m: usize,
    basis: Basis,
) -> Result<Vec<f64>> {
    let n = op.n();
    let v = cfg.probe(index, n);
    let scale = match cfg.normalization {
        ProbeNormalization::SelfNormalized => {
            let vv = dot(&v, &v);
            if vv == 0.0 {
                return Err(Error::InvalidArgument("zero probe vector".into()));
            }
            vv
        }
        ProbeNormalization::Dimension => n as f64,
    };
    let mut out = Vec::with_capacity(m);
    match basis {
        Basis::Power => {
            let mut w = v.clone();
            let mut next = vec![0.0; n];
            for _ in 0..m {
                op.matvec_into(&w, &mut next)?;
                std::mem::swap(&mut w, &mut next);
                out.push(dot(&v, &w) / scale);
            }
        }
        Basis::ChebyshevShifted => {
            // w_k = T_k(2X - I) v
            let mut prev = v.clone();
            let mut cur = vec![0.0; n];
            op.matvec_into(&v, &mut cur)?;
            for (c, x) in cur.iter_mut().zip(&v) {
                *c = 2.0 * *c - x;
            }
            out.push(dot(&v, &cur) / scale);
            let mut xw = vec![0.0; n];
            for _ in 1..m {
                op.matvec_into(&cur, &mut xw)?;
                // next = 2 (2X - I) cur - prev, written into prev
                for ((p, c), x) in prev.iter_mut().zip(&cur).zip(&xw) {
                    *p = 2.0 * (2.0 * x - c) - *p;
                }
                std::mem::swap(&mut prev, &mut cur);
                out.push(dot(&v, &cur) / scale);
            }
        }
    }
    Ok(out)
}

/// Moments of a Dirac mixture, `sum_i w_i phi_k(lambda_i)`.
pub fn exact_moments(dirac: &DiracSpectrum, m: usize, basis: Basis) -> Result<MomentVector> {
    let total: f64 = dirac.atoms().iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { sum: total });
    }
    let mut values = vec![0.0; m];
    let mut phi = vec![0.0; m];
    for &(lambda, w) in dirac.atoms() {
        basis.eval_into(lambda, &mut phi);
        for (acc, p) in values.iter_mut().zip(&phi) {
            *acc += w * p;
        }
    }
    Ok(MomentVector::exact(basis, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::DiracSource;
    use crate::graph::SparseGraph;

    fn isolated(n: usize) -> SparseGraph {
        SparseGraph::from_edges(n, std::iter::empty()).unwrap()
    }

    #[test]
    fn scalar_spectrum_is_exact_for_any_probe() {
        let g = isolated(37);
        let op = SpectralOperator::rescaled(&g);
        for dist in [ProbeDistribution::Gaussian, ProbeDistribution::Rademacher] {
            let cfg = ProbeConfig::new(5, 11).with_distribution(dist);
            let mv = ste_moments(&op, &cfg, 8, Basis::Power).unwrap();
            for (i, v) in mv.values.iter().enumerate() {
                assert_eq!(*v, 0.5f64.powi(i as i32 + 1));
            }
        }
        // Plain Hutchinson scaling is exact only when |v|^2 = n.
        let cfg = ProbeConfig::new(5, 11)
            .with_distribution(ProbeDistribution::Rademacher)
            .with_normalization(ProbeNormalization::Dimension);
        let mv = ste_moments(&op, &cfg, 8, Basis::Power).unwrap();
        for (i, v) in mv.values.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(i as i32 + 1));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = SparseGraph::from_unweighted(
            6,
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)],
        )
        .unwrap();
        let op = SpectralOperator::rescaled(&g);
        let cfg = ProbeConfig::new(17, 99);
        let a = ste_moments(&op, &cfg, 6, Basis::ChebyshevShifted).unwrap();
        let b = ste_moments(&op, &cfg, 6, Basis::ChebyshevShifted).unwrap();
        assert_eq!(a, b);
        let c = ste_moments(&op, &ProbeConfig::new(17, 100), 6, Basis::ChebyshevShifted).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn errors() {
        let g = isolated(3);
        let op = SpectralOperator::rescaled(&g);
        let cfg = ProbeConfig::new(2, 0);
        assert!(ste_moments(&op, &cfg, 0, Basis::Power).is_err());
        assert!(ste_moments(&op, &ProbeConfig::new(0, 0), 3, Basis::Power).is_err());
        let full = SpectralOperator::new(&g, OperatorMode::NormalizedLaplacian);
        assert!(matches!(
            ste_moments(&full, &cfg, 3, Basis::Power),
            Err(Error::NotRescaled)
        ));
    }

    #[test]
    fn dirac_moments() {
        let point = DiracSpectrum::new(vec![(0.5, 1.0)], DiracSource::Synthetic).unwrap();
        let mv = exact_moments(&point, 6, Basis::Power).unwrap();
        for (i, v) in mv.values.iter().enumerate() {
            assert_eq!(*v, 0.5f64.powi(i as i32 + 1));
        }

        let ends =
            DiracSpectrum::new(vec![(0.0, 0.5), (1.0, 0.5)], DiracSource::Synthetic).unwrap();
        let mv = exact_moments(&ends, 6, Basis::Power).unwrap();
        assert!(mv.values.iter().all(|&v| v == 0.5));

        let grid = DiracSpectrum::new(
            (0..=100).map(|k| (k as f64 / 100.0, 1.0 / 101.0)).collect(),
            DiracSource::Synthetic,
        )
        .unwrap();
        let mv = exact_moments(&grid, 2, Basis::Power).unwrap();
        // sum_k (k/100)^2 / 101 = 201 / 600
        assert!((mv.values[0] - 0.5).abs() < 1e-14);
        assert!((mv.values[1] - 0.335).abs() < 1e-14);
    }

    #[test]
    fn unnormalized_weights_rejected() {
        let bad = DiracSpectrum::from_atoms_unchecked(vec![(0.5, 0.7)], DiracSource::Synthetic);
        assert!(matches!(
            exact_moments(&bad, 2, Basis::Power),
            Err(Error::Unnormalized { .. })
        ));
    }
}
