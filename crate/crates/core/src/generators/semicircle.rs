use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::moments::convert::convert_exact;
use crate::moments::{MomentVector, MAX_CONVERSION_ORDER};

/// A semicircle law with support `[center - radius, center + radius]`
/// inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemicircleSpec {
    center: f64,
    radius: f64,
}

impl SemicircleSpec {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        let inside = center > 0.0
            && center < 1.0
            && radius > 0.0
            && center - radius >= -1e-12
            && center + radius <= 1.0 + 1e-12;
        if !inside {
            return Err(Error::InvalidArgument(format!(
                "semicircle support [{}, {}] is not inside [0, 1]",
                center - radius,
                center + radius
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

fn catalan(n: u64) -> BigInt {
    // C_{k+1} = C_k * 2(2k + 1) / (k + 2)
    let mut c = BigInt::one();
    for k in 0..n {
        c = c * (2 * (2 * k + 1)) / (k + 2);
    }
    c
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Exact raw moments `mu_0..mu_m` of a semicircle centered at `center`.
fn exact_raw_moments(center: f64, radius: f64, m: usize) -> Vec<BigRational> {
    let x0 = BigRational::from_float(center).unwrap_or_else(BigRational::zero);
    let half = BigRational::from_float(radius).unwrap_or_else(BigRational::zero)
        / BigRational::from_integer(2.into());
    // Central moments: odd vanish, even are (R/2)^{2j} C_j.
    let central: Vec<BigRational> = (0..=m)
        .map(|k| {
            if k % 2 == 1 {
                BigRational::zero()
            } else {
                let j = (k / 2) as u64;
                num_traits::pow(half.clone(), k) * BigRational::from_integer(catalan(j))
            }
        })
        .collect();
    (0..=m)
        .map(|k| {
            (0..=k)
                .step_by(2)
                .map(|c| {
                    BigRational::from_integer(binomial(k as u64, c as u64))
                        * num_traits::pow(x0.clone(), k - c)
                        * &central[c]
                })
                .fold(BigRational::zero(), |a, b| a + b)
        })
        .collect()
}

/// Raw power moments `mu_1..mu_m` from the closed form without checking that
/// the support lies in `[0, 1]`.
pub fn semicircle_raw_moments(center: f64, radius: f64, m: usize) -> Vec<f64> {
    exact_raw_moments(center, radius, m)[1..]
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .collect()
}

/// Power moments `mu_1..mu_m` of the semicircle.
pub fn semicircle_moments(spec: &SemicircleSpec, m: usize) -> Result<MomentVector> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "moment order must be at least 1".into(),
        ));
    }
    Ok(MomentVector::exact(
        Basis::Power,
        semicircle_raw_moments(spec.center, spec.radius, m),
    ))
}

/// Shifted-Chebyshev moments computed exactly before rounding. Rounding the
/// power moments first would lose all accuracy beyond a few dozen moments.
pub fn semicircle_chebyshev_moments(spec: &SemicircleSpec, m: usize) -> Result<MomentVector> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "moment order must be at least 1".into(),
        ));
    }
    if m > MAX_CONVERSION_ORDER {
        return Err(Error::ConversionOrder {
            m,
            max: MAX_CONVERSION_ORDER,
        });
    }
    let raw = exact_raw_moments(spec.center, spec.radius, m);
    let cheb = convert_exact(&raw, Basis::Power, Basis::ChebyshevShifted);
    Ok(MomentVector::exact(
        Basis::ChebyshevShifted,
        cheb[1..]
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect(),
    ))
}

/// `(2 / (pi R^2)) sqrt(R^2 - (x - x0)^2)` on the support, zero elsewhere.
pub fn semicircle_density(spec: &SemicircleSpec, x: f64) -> f64 {
    let r2 = spec.radius * spec.radius;
    let d = x - spec.center;
    if d * d >= r2 {
        return 0.0;
    }
    2.0 / (PI * r2) * (r2 - d * d).sqrt()
}
