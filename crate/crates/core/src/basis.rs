//! Moment basis functions on the unit interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Polynomial family `phi_1..phi_m` whose expectations are the moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Monomials `lambda^i`.
    Power,
    /// Shifted Chebyshev polynomials `T_i(2 lambda - 1)`.
    #[serde(alias = "chebyshev")]
    ChebyshevShifted,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Power => "power",
            Basis::ChebyshevShifted => "chebyshev",
        })
    }
}

impl FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "power" => Ok(Basis::Power),
            "chebyshev" | "chebyshev_shifted" => Ok(Basis::ChebyshevShifted),
            other => Err(format!(
                "unknown basis {other:?} (expected power or chebyshev)"
            )),
        }
    }
}

impl Basis {
    /// Writes `phi_1(x)..phi_m(x)` into `out` (length `m`).
    pub fn eval_into(self, x: f64, out: &mut [f64]) {
        let m = out.len();
        if m == 0 {
            return;
        }
        match self {
            Basis::Power => {
                let mut p = x;
                for slot in out.iter_mut() {
                    *slot = p;
                    p *= x;
                }
            }
            Basis::ChebyshevShifted => {
                let t = 2.0 * x - 1.0;
                let (mut prev, mut cur) = (1.0, t);
                out[0] = cur;
                for slot in out.iter_mut().skip(1) {
                    let next = 2.0 * t * cur - prev;
                    prev = cur;
                    cur = next;
                    *slot = cur;
                }
            }
        }
    }

    pub fn eval(self, x: f64, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        self.eval_into(x, &mut out);
        out
    }

    /// Values, first and second derivatives (with respect to `x`) of
    /// `phi_1..phi_m`.
    pub fn eval_with_derivatives(self, x: f64, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut v = vec![0.0; m];
        let mut d1 = vec![0.0; m];
        let mut d2 = vec![0.0; m];
        match self {
            Basis::Power => {
                // x^i, i x^(i-1), i (i-1) x^(i-2)
                let mut pow = vec![1.0; m + 1];
                for i in 1..=m {
                    pow[i] = pow[i - 1] * x;
                }
                for i in 1..=m {
                    let fi = i as f64;
                    v[i - 1] = pow[i];
                    d1[i - 1] = fi * pow[i - 1];
                    d2[i - 1] = if i >= 2 {
                        fi * (fi - 1.0) * pow[i - 2]
                    } else {
                        0.0
                    };
                }
            }
            Basis::ChebyshevShifted => {
                // Differentiate T_{k+1} = 2t T_k - T_{k-1} in t, then apply
                // dt/dx = 2.
                let t = 2.0 * x - 1.0;
                let (mut t0, mut t1) = (1.0, t);
                let (mut dt0, mut dt1) = (0.0, 1.0);
                let (mut ddt0, mut ddt1) = (0.0, 0.0);
                for k in 0..m {
                    v[k] = t1;
                    d1[k] = 2.0 * dt1;
                    d2[k] = 4.0 * ddt1;
                    let t2 = 2.0 * t * t1 - t0;
                    let dt2 = 2.0 * t1 + 2.0 * t * dt1 - dt0;
                    let ddt2 = 4.0 * dt1 + 2.0 * t * ddt1 - ddt0;
                    (t0, t1) = (t1, t2);
                    (dt0, dt1) = (dt1, dt2);
                    (ddt0, ddt1) = (ddt1, ddt2);
                }
            }
        }
        (v, d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_values_at_midpoint() {
        // T_i(0) = 1, 0, -1, 0, 1, ...
        let v = Basis::ChebyshevShifted.eval(0.5, 6);
        let want = [0.0, -1.0, 0.0, 1.0, 0.0, -1.0];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn chebyshev_matches_cosine_form() {
        for &x in &[0.0, 0.1, 0.37, 0.8, 1.0] {
            let theta = (2.0f64 * x - 1.0).acos();
            let v = Basis::ChebyshevShifted.eval(x, 12);
            for (k, val) in v.iter().enumerate() {
                let want = (((k + 1) as f64) * theta).cos();
                assert!((val - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for basis in [Basis::Power, Basis::ChebyshevShifted] {
            for &x in &[0.13, 0.5, 0.91] {
                let (_, d1, d2) = basis.eval_with_derivatives(x, 10);
                let lo = basis.eval(x - h, 10);
                let mid = basis.eval(x, 10);
                let hi = basis.eval(x + h, 10);
                for k in 0..10 {
                    let fd1 = (hi[k] - lo[k]) / (2.0 * h);
                    let fd2 = (hi[k] - 2.0 * mid[k] + lo[k]) / (h * h);
                    let scale = 1.0 + d1[k].abs();
                    assert!((fd1 - d1[k]).abs() < 1e-6 * scale, "{basis} d1 k={k}");
                    let scale2 = 1.0 + d2[k].abs();
                    assert!((fd2 - d2[k]).abs() < 1e-3 * scale2, "{basis} d2 k={k}");
                }
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("power".parse::<Basis>().unwrap(), Basis::Power);
        assert_eq!(
            "chebyshev".parse::<Basis>().unwrap(),
            Basis::ChebyshevShifted
        );
        assert!("legendre".parse::<Basis>().is_err());
    }
}
