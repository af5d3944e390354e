use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxent::EntropicSpectrum;

/// Interior points scanned for the spectral valley.
pub const CLUSTER_GRID_POINTS: usize = 10_000;

/// Relative derivative tolerance used when none is given.
pub const DEFAULT_RELATIVE_ETA: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterEstimate {
    /// Location of the first valley after the peak nearest zero.
    pub lambda_star: f64,
    pub eta: f64,
    /// `int_0^{lambda_star} p` under the fit's quadrature rule.
    pub mass: f64,
    /// `n * mass`, unrounded.
    pub n_clusters: f64,
    pub n_clusters_rounded: u64,
}

impl ClusterEstimate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// The gap minimum must have at most this fraction of the highest density
/// before it.
pub const VALLEY_PROMINENCE: f64 = 0.1;

/// Estimates the number of near-disconnected clusters of an `n`-node graph
/// from the mass its spectral density places below the first spectral gap.
///
/// The gap is the lowest density between the first local maximum and the
/// spectral median, and must be below `VALLEY_PROMINENCE` times the highest
/// density before it. Near-zero eigenvalues may form several bumps, so the
/// scan for `lambda_star` starts after the last local maximum preceding the
/// gap: it is the first grid point there with `|p'| <= eta` and `p'' > 0`.
/// Without `eta`, `DEFAULT_RELATIVE_ETA * max |p'|` over the grid is used.
pub fn estimate_clusters(
    es: &EntropicSpectrum,
    n: usize,
    eta: Option<f64>,
) -> Result<ClusterEstimate> {
    if let Some(e) = eta {
        if !(e > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eta must be positive, got {e}"
            )));
        }
    }
    let h = 1.0 / (CLUSTER_GRID_POINTS + 1) as f64;
    let grid: Vec<f64> = (1..=CLUSTER_GRID_POINTS).map(|i| i as f64 * h).collect();
    let density = grid
        .iter()
        .map(|&x| es.density(x))
        .collect::<Result<Vec<_>>>()?;
    let derivs = grid
        .iter()
        .map(|&x| es.density_derivatives(x))
        .collect::<Result<Vec<_>>>()?;
    if derivs.iter().any(|d| !(d.0.is_finite() && d.1.is_finite())) {
        return Err(Error::QuadratureOverflow {
            exponent: grid
                .iter()
                .map(|&x| es.log_density(x))
                .fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let eta = eta.unwrap_or_else(|| {
        DEFAULT_RELATIVE_ETA * derivs.iter().fold(0.0f64, |acc, d| acc.max(d.0.abs()))
    });
    let slope = |i: usize| derivs[i].0;

    let total: f64 = density.iter().sum();
    let mut running = 0.0;
    let median = density
        .iter()
        .position(|&p| {
            running += p;
            running >= 0.5 * total
        })
        .unwrap_or(grid.len() - 1);
    let first_peak = if slope(0) <= 0.0 {
        0
    } else {
        (1..median)
            .find(|&i| slope(i - 1) > 0.0 && slope(i) <= 0.0)
            .ok_or(Error::NoSpectralGap)?
    };
    let valley = (first_peak + 1..median)
        .min_by(|&i, &j| density[i].total_cmp(&density[j]))
        .ok_or(Error::NoSpectralGap)?;
    let highest = density[..=valley].iter().copied().fold(0.0, f64::max);
    if valley + 1 >= median || density[valley] > VALLEY_PROMINENCE * highest {
        return Err(Error::NoSpectralGap);
    }
    let start = (first_peak..valley)
        .rev()
        .find(|&i| slope(i) > 0.0)
        .map_or(first_peak, |i| i + 1);
    let star = (start..=valley)
        .find(|&i| slope(i).abs() <= eta && derivs[i].1 > 0.0)
        .unwrap_or(valley);
    let lambda_star = grid[star];

    let mass = es.cumulative(lambda_star);
    let n_clusters = n as f64 * mass;
    Ok(ClusterEstimate {
        lambda_star,
        eta,
        mass,
        n_clusters,
        n_clusters_rounded: n_clusters.round().max(0.0) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Basis;
    use crate::maxent::{maxent_fit, SolverConfig};
    use crate::moments::MomentVector;
    use crate::quadrature::GaussLegendre;

    /// Shifted-Chebyshev moments of a spectrum with weight `w` near zero
    /// and the rest spread over a band centered at `c`.
    fn two_bump_moments(w: f64, c: f64, m: usize) -> Vec<f64> {
        let q = GaussLegendre::new(2000);
        let low = |x: f64| (-(x / 0.01).powi(2)).exp();
        let band = |x: f64| (-((x - c) / 0.05).powi(2)).exp();
        let (zl, zb) = (q.integrate(low), q.integrate(band));
        let mut out = vec![0.0; m];
        let mut phi = vec![0.0; m];
        for (&x, &wt) in q.nodes().iter().zip(q.weights()) {
            let p = w * low(x) / zl + (1.0 - w) * band(x) / zb;
            Basis::ChebyshevShifted.eval_into(x, &mut phi);
            for (a, v) in out.iter_mut().zip(&phi) {
                *a += wt * p * v;
            }
        }
        out
    }

    #[test]
    fn counts_mass_below_the_gap() {
        let mv = MomentVector::exact(Basis::ChebyshevShifted, two_bump_moments(0.1, 0.5, 40));
        let es = maxent_fit(&mv, &SolverConfig::default()).unwrap();
        let ce = estimate_clusters(&es, 50, None).unwrap();
        assert!(ce.lambda_star > 0.02 && ce.lambda_star < 0.4, "{ce:?}");
        assert!((ce.n_clusters - 5.0).abs() < 0.1, "{ce:?}");
        assert_eq!(ce.n_clusters_rounded, 5);
        let v: serde_json::Value = serde_json::from_str(&ce.to_json().unwrap()).unwrap();
        for key in [
            "lambda_star",
            "eta",
            "mass",
            "n_clusters",
            "n_clusters_rounded",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn unimodal_spectrum_has_no_gap() {
        let es = maxent_fit(
            &MomentVector::exact(Basis::Power, vec![0.5, 0.26]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            estimate_clusters(&es, 100, None),
            Err(Error::NoSpectralGap)
        ));
        assert!(matches!(
            estimate_clusters(&es, 100, Some(0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }
}
