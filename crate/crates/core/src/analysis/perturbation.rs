use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How far the smallest normalized-Laplacian eigenvalue can move when one
/// edge joins node `1` (degree `d1`) and node `2` (degree `d2`) of two
/// disconnected components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBound {
    /// First-order shift
    /// `|s_a (1/sqrt(d1) - 1/sqrt(d1+1)) + s_b (1/sqrt(d2) - 1/sqrt(d2+1)) - 2/sqrt(d1 d2)|`
    /// with `s_a = sum_{g ~ 1} 1/sqrt(d_g)` and `s_b` likewise. Equals `1/d`
    /// for two `d`-regular clusters.
    pub bound: f64,
    /// `|s_a / sqrt(d1) + s_b / sqrt(d2) - 2 / sqrt(d1 d2)|`, the
    /// unlinearized expression, which approaches `2 - 2/d` in the regular
    /// case.
    pub stated: f64,
}

fn inverse_sqrt_sum(degrees: &[f64]) -> Result<f64> {
    if degrees.is_empty() {
        return Err(Error::InvalidArgument(
            "neighbor degree list is empty".into(),
        ));
    }
    if let Some(d) = degrees.iter().find(|&&d| !(d >= 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "neighbor degree {d} is below 1"
        )));
    }
    Ok(degrees.iter().map(|d| 1.0 / d.sqrt()).sum())
}

/// Bound on the eigenvalue shift caused by adding a single edge between two
/// components. `nbr_degrees_*` are the degrees of the endpoints' neighbors
/// before the edge is added.
pub fn perturbation_bound(
    d1: f64,
    d2: f64,
    nbr_degrees_1: &[f64],
    nbr_degrees_2: &[f64],
) -> Result<PerturbationBound> {
    if !(d1 >= 1.0 && d2 >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "endpoint degrees must be at least 1, got {d1} and {d2}"
        )));
    }
    let sa = inverse_sqrt_sum(nbr_degrees_1)?;
    let sb = inverse_sqrt_sum(nbr_degrees_2)?;
    let cross = 2.0 / (d1 * d2).sqrt();
    let shift = |d: f64| 1.0 / d.sqrt() - 1.0 / (d + 1.0).sqrt();
    Ok(PerturbationBound {
        bound: (sa * shift(d1) + sb * shift(d2) - cross).abs(),
        stated: (sa / d1.sqrt() + sb / d2.sqrt() - cross).abs(),
    })
}
