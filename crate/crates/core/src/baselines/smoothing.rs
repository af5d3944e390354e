//! Kernel smoothing of Dirac mixtures and the moment bias it introduces.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dirac::DiracSpectrum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Gaussian,
    Cauchy,
}

impl Kernel {
    /// `k_sigma(x)`.
    pub fn eval(self, x: f64, sigma: f64) -> f64 {
        match self {
            Kernel::Gaussian => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Kernel::Cauchy => sigma / (PI * (x * x + sigma * sigma)),
        }
    }

    /// `int_{-inf}^{x} k_sigma`.
    pub fn cdf(self, x: f64, sigma: f64) -> f64 {
        match self {
            Kernel::Gaussian => 0.5 * libm::erfc(-x / (sigma * SQRT_2)),
            Kernel::Cauchy => 0.5 + (x / sigma).atan() / PI,
        }
    }

    /// Central moment `E[x^{2j}]` of the kernel. The Gaussian gives
    /// `sigma^{2j} (2j - 1)!!`; the Cauchy kernel has none.
    pub fn even_moment(self, j: u32, sigma: f64) -> Result<f64> {
        match self {
            Kernel::Gaussian => {
                let double_factorial: f64 = (1..=j).map(|i| (2 * i - 1) as f64).product();
                Ok((sigma * sigma).powi(j as i32) * double_factorial)
            }
            Kernel::Cauchy => Err(Error::UnsupportedKernel("cauchy")),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Cauchy => "cauchy",
        })
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian" => Ok(Kernel::Gaussian),
            "cauchy" => Ok(Kernel::Cauchy),
            other => Err(format!(
                "unknown kernel {other:?} (expected gaussian or cauchy)"
            )),
        }
    }
}

/// `sum_i w_i k_sigma(lambda - lambda_i)`, a density on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSpectrum {
    pub base: DiracSpectrum,
    pub kernel: Kernel,
    pub bandwidth: f64,
}

pub fn smooth(dirac: &DiracSpectrum, kernel: Kernel, sigma: f64) -> Result<SmoothedSpectrum> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    Ok(SmoothedSpectrum {
        base: dirac.clone(),
        kernel,
        bandwidth: sigma,
    })
}

impl SmoothedSpectrum {
    pub fn density(&self, lambda: f64) -> f64 {
        self.base
            .atoms()
            .iter()
            .map(|&(l, w)| w * self.kernel.eval(lambda - l, self.bandwidth))
            .sum()
    }

    pub fn sample(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&x| self.density(x)).collect()
    }

    /// Exact mass the smoothed density places on `[a, b]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let (k, s) = (self.kernel, self.bandwidth);
        self.base
            .atoms()
            .iter()
            .map(|&(l, w)| w * (k.cdf(b - l, s) - k.cdf(a - l, s)))
            .sum()
    }

    /// Density on `points` uniformly spaced over `[0, 1]` (endpoints
    /// included), rescaled so its trapezoid integral is one.
    pub fn normalized_grid(&self, points: usize) -> (Vec<f64>, Vec<f64>) {
        let grid = unit_grid(points);
        let mut values = self.sample(&grid);
        let area = trapezoid(&grid, &values);
        if area > 0.0 {
            values.iter_mut().for_each(|v| *v /= area);
        }
        (grid, values)
    }

    /// CSV with header `lambda,density` over a normalized unit grid.
    pub fn write_csv<W: Write>(&self, points: usize, mut out: W) -> Result<()> {
        let (grid, values) = self.normalized_grid(points);
        writeln!(out, "lambda,density")?;
        for (x, v) in grid.iter().zip(&values) {
            writeln!(out, "{x:.7e},{v:.7e}")?;
        }
        Ok(())
    }
}

pub(crate) fn unit_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let h = 1.0 / (points - 1) as f64;
    (0..points).map(|k| k as f64 * h).collect()
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shift of the `m`-th power moment caused by smoothing `dirac` with a
/// symmetric kernel:
/// `sum_i w_i sum_{j >= 1, 2j <= m} C(m, 2j) E_k[x^{2j}] lambda_i^{m - 2j}`.
///
/// Kernels without finite moments are rejected.
pub fn smoothed_moment_bias(
    dirac: &DiracSpectrum,
    kernel: Kernel,
    sigma: f64,
    m: u32,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    kernel.even_moment(1, sigma)?;
    let mut bias = 0.0;
    for j in 1..=m / 2 {
        bias += binomial(m, 2 * j) * kernel.even_moment(j, sigma)? * dirac.power_moment(m - 2 * j);
    }
    Ok(bias)
}
