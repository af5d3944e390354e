//! Exact change of basis between monomial and shifted-Chebyshev moments.
//!
//! The integer coefficients of `T_k(2x - 1)` grow like `5.83^k`, so every
//! conversion is carried out in exact rational arithmetic and rounded to
//! `f64` once at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::MomentVector;
use crate::basis::Basis;
use crate::error::{Error, Result};

pub const MAX_CONVERSION_ORDER: usize = 120;

/// Row `k` holds the monomial coefficients of `T_k(2x - 1)`, `k = 0..=m`.
pub(crate) fn shifted_chebyshev_coefficients(m: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    if m == 0 {
        return rows;
    }
    rows.push(vec![BigInt::from(-1), BigInt::from(2)]);
    for k in 1..m {
        // T_{k+1} = (4x - 2) T_k - T_{k-1}
        let mut next = vec![BigInt::zero(); k + 2];
        for (j, c) in rows[k].iter().enumerate() {
            next[j + 1] += c * 4;
            next[j] -= c * 2;
        }
        for (j, c) in rows[k - 1].iter().enumerate() {
            next[j] -= c;
        }
        rows.push(next);
    }
    rows
}

/// Row `n` holds integers `a_{n,k}` with `x^n = 4^{-n} sum_k a_{n,k} T_k(2x - 1)`.
pub(crate) fn monomial_in_chebyshev(m: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for n in 0..m {
        // 4x T_0 = 2 T_0 + 2 T_1; 4x T_k = T_{k+1} + 2 T_k + T_{k-1}
        let mut next = vec![BigInt::zero(); n + 2];
        for (k, a) in rows[n].iter().enumerate() {
            if k == 0 {
                next[0] += a * 2;
                next[1] += a * 2;
            } else {
                next[k + 1] += a;
                next[k] += a * 2;
                next[k - 1] += a;
            }
        }
        rows.push(next);
    }
    rows
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidArgument(format!("non-finite moment {x}")))
}

fn round(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Re-expresses `mv` in `target` basis. The result is exact up to the final
/// rounding of each value. Estimator variances are dropped because the
/// conversion needs the full covariance.
pub fn basis_convert(mv: &MomentVector, target: Basis) -> Result<MomentVector> {
    let m = mv.values.len();
    if m > MAX_CONVERSION_ORDER {
        return Err(Error::ConversionOrder {
            m,
            max: MAX_CONVERSION_ORDER,
        });
    }
    if mv.basis == target {
        return Ok(mv.clone());
    }
    let mut source = Vec::with_capacity(m + 1);
    source.push(BigRational::one());
    for &v in &mv.values {
        source.push(exact(v)?);
    }
    let converted = convert_exact(&source, mv.basis, target);
    Ok(MomentVector {
        basis: target,
        m,
        probes_used: mv.probes_used,
        seed: mv.seed,
        values: converted[1..].iter().map(round).collect(),
        estimator_variance: Vec::new(),
    })
}

/// Converts an exact moment sequence `mu_0..mu_m` between bases.
pub(crate) fn convert_exact(source: &[BigRational], from: Basis, to: Basis) -> Vec<BigRational> {
    let m = source.len().saturating_sub(1);
    match (from, to) {
        (Basis::Power, Basis::ChebyshevShifted) => {
            let coeffs = shifted_chebyshev_coefficients(m);
            coeffs
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(source)
                        .fold(BigRational::zero(), |acc, (c, mu)| {
                            acc + mu * BigRational::from_integer(c.clone())
                        })
                })
                .collect()
        }
        (Basis::ChebyshevShifted, Basis::Power) => {
            let coeffs = monomial_in_chebyshev(m);
            coeffs
                .iter()
                .enumerate()
                .map(|(n, row)| {
                    let num = row
                        .iter()
                        .zip(source)
                        .fold(BigRational::zero(), |acc, (a, mu)| {
                            acc + mu * BigRational::from_integer(a.clone())
                        });
                    num / BigRational::from_integer(BigInt::from(4).pow(n as u32))
                })
                .collect()
        }
        _ => source.to_vec(),
    }
}
