//! Maximum-entropy densities on `[0, 1]` matching a finite moment sequence.
//!
//! The fitted density is `p(x) = exp(-(alpha0 + sum_i alpha_i phi_i(x)))`.
//! `alpha0 = log Z(alpha)` is kept equal to the log normalizer, so `p`
//! integrates to one under the solver's quadrature rule at every iterate.
//!
//! The coefficients solve the convex dual
//!
//! ```text
//! F(alpha) = log int_0^1 exp(-sum_i alpha_i phi_i) + sum_i alpha_i mu_i
//! ```
//!
//! by damped Newton steps with a backtracking line search. The gradient is
//! `mu - E_p[phi]` and the Hessian is the covariance of `phi` under `p`.
//!
//! Every fit runs in the shifted-Chebyshev basis. Power-basis moments are
//! converted exactly beforehand and the resulting coefficients mapped back,
//! because the monomial Hessian is numerically singular beyond a handful of
//! moments. Density evaluation always uses the Chebyshev coefficients.
//!
//! Moments estimated from random probes carry sampling noise, and the exact
//! match then tends to chase it with spikes narrower than the quadrature can
//! see. [`SolverConfig::noise_scale`] adds a Gaussian prior on each moment
//! error whose width is a multiple of the moment's standard error, which
//! keeps the dual strictly convex and the coefficients bounded.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::moments::convert::{monomial_in_chebyshev, shifted_chebyshev_coefficients};
use crate::moments::{basis_convert, MomentVector};
use crate::quadrature::GaussLegendre;

/// Largest admissible exponent of the density before overflow is reported.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Max-norm tolerance on the moment residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Gauss-Legendre nodes on `[0, 1]`.
    pub quadrature_order: usize,
    /// Initial diagonal jitter added to the Hessian; raised tenfold on each
    /// failed Cholesky factorization.
    pub ridge: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step shrink factor during backtracking.
    pub shrink: f64,
    pub max_backtracks: usize,
    /// Coefficient norm beyond which the moments are declared degenerate.
    pub max_coefficient_norm: f64,
    /// Multiplier on the standard errors of estimated moments. Zero (the
    /// default) requests an exact match. A positive value treats moments
    /// that carry an estimator variance as observed with Gaussian noise of
    /// this many standard errors: the dual gains the penalty
    /// `sum_i (noise_scale * se_i)^2 * a_i^2 / 2`, where `a` are the
    /// coefficients in the input basis, and `tol` bounds the penalized
    /// gradient instead of the raw moment residual.
    #[serde(default)]
    pub noise_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 500,
            quadrature_order: 512,
            ridge: 1e-10,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
            max_coefficient_norm: 1e6,
            noise_scale: 0.0,
        }
    }
}

impl SolverConfig {
    /// Defaults with `noise_scale = 1`, for moments estimated by stochastic
    /// trace estimation. Such moments are rarely attained exactly by any
    /// density the quadrature resolves.
    pub fn noise_aware() -> Self {
        Self {
            noise_scale: 1.0,
            ..Self::default()
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.quadrature_order < 2 * m + 1 {
            return Err(Error::InvalidArgument(format!(
                "quadrature order {} is below 2m+1 = {}",
                self.quadrature_order,
                2 * m + 1
            )));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise scale must be finite and non-negative".into(),
            ));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidArgument("shrink must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Coefficients of `exp(-(alpha0 + sum_k alpha_k T_k(2x - 1)))` and the
/// moments it attains under the solver quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevForm {
    pub alpha0: f64,
    pub alpha: Vec<f64>,
    pub moments: Vec<f64>,
}

impl ChebyshevForm {
    /// `sum_k alpha_k T_k(2x - 1)` by Clenshaw's recurrence.
    fn exponent(&self, x: f64) -> f64 {
        let t = 2.0 * x - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &a in self.alpha.iter().rev() {
            let b0 = a + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2
    }
}

/// A fitted maximum-entropy spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropicSpectrum {
    basis: Basis,
    alpha0: f64,
    alpha: Vec<f64>,
    target_moments: Vec<f64>,
    fitted_moments: Vec<f64>,
    residual: f64,
    chebyshev: ChebyshevForm,
    quadrature_order: usize,
    iterations: usize,
    dual_history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRecord {
    basis: Basis,
    alpha0: f64,
    alpha: Vec<f64>,
    residual: f64,
    target_moments: Vec<f64>,
    fitted_moments: Vec<f64>,
    quadrature_order: usize,
    chebyshev: ChebyshevForm,
}

impl EntropicSpectrum {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn target_moments(&self) -> &[f64] {
        &self.target_moments
    }

    /// `E_p[phi_i]` under the solver quadrature, in [`Self::basis`].
    pub fn fitted_moments(&self) -> &[f64] {
        &self.fitted_moments
    }

    /// `max_i |fitted_i - target_i|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn chebyshev(&self) -> &ChebyshevForm {
        &self.chebyshev
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Dual objective after each accepted Newton step, starting with the
    /// initial (uniform) point.
    pub fn dual_history(&self) -> &[f64] {
        &self.dual_history
    }

    /// Uniform density on `[0, 1]` with `m` zero coefficients.
    pub fn uniform(basis: Basis, m: usize) -> Self {
        let quadrature_order = SolverConfig::default().quadrature_order.max(2 * m + 1);
        let q = GaussLegendre::new(quadrature_order);
        let mut moments = vec![0.0; m];
        let mut phi = vec![0.0; m];
        for (&x, &w) in q.nodes().iter().zip(q.weights()) {
            Basis::ChebyshevShifted.eval_into(x, &mut phi);
            for (acc, p) in moments.iter_mut().zip(&phi) {
                *acc += w * p;
            }
        }
        let chebyshev = ChebyshevForm {
            alpha0: 0.0,
            alpha: vec![0.0; m],
            moments,
        };
        Self::from_chebyshev(basis, chebyshev, None, quadrature_order, 0, Vec::new())
    }

    fn from_chebyshev(
        basis: Basis,
        chebyshev: ChebyshevForm,
        target: Option<Vec<f64>>,
        quadrature_order: usize,
        iterations: usize,
        dual_history: Vec<f64>,
    ) -> Self {
        let (alpha0, alpha, fitted) = match basis {
            Basis::ChebyshevShifted => (
                chebyshev.alpha0,
                chebyshev.alpha.clone(),
                chebyshev.moments.clone(),
            ),
            Basis::Power => {
                let (a0, a) = chebyshev_to_power_coefficients(chebyshev.alpha0, &chebyshev.alpha);
                let fitted = chebyshev_to_power_moments(&chebyshev.moments);
                (a0, a, fitted)
            }
        };
        let target_moments = target.unwrap_or_else(|| fitted.clone());
        let residual = fitted
            .iter()
            .zip(&target_moments)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Self {
            basis,
            alpha0,
            alpha,
            target_moments,
            fitted_moments: fitted,
            residual,
            chebyshev,
            quadrature_order,
            iterations,
            dual_history,
        }
    }

    /// `-(alpha0 + sum_i alpha_i phi_i(x))`, the log density.
    pub fn log_density(&self, x: f64) -> f64 {
        -(self.chebyshev.alpha0 + self.chebyshev.exponent(x))
    }

    fn density_unchecked(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// `p(x)` for `x` in `[0, 1]`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        Ok(self.density_unchecked(x))
    }

    pub fn density_at(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.density(x)).collect()
    }

    /// `(p'(x), p''(x))` from `p' = -p q'` and `p'' = p (q'^2 - q'')`, where
    /// `q` is the exponent polynomial.
    pub fn density_derivatives(&self, x: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let m = self.chebyshev.alpha.len();
        let (_, d1, d2) = Basis::ChebyshevShifted.eval_with_derivatives(x, m);
        let a = &self.chebyshev.alpha;
        let q1: f64 = a.iter().zip(&d1).map(|(a, d)| a * d).sum();
        let q2: f64 = a.iter().zip(&d2).map(|(a, d)| a * d).sum();
        let p = self.density_unchecked(x);
        Ok((-p * q1, p * (q1 * q1 - q2)))
    }

    /// `-int p log p = alpha0 + sum_i alpha_i E_p[phi_i]`.
    pub fn differential_entropy(&self) -> f64 {
        let c = &self.chebyshev;
        c.alpha0
            + c.alpha
                .iter()
                .zip(&c.moments)
                .map(|(a, m)| a * m)
                .sum::<f64>()
    }

    /// Probability of `[0, x]` under the solver quadrature, the rule that
    /// normalizes the density. Near the ends of `[0, 1]` the density may
    /// vary faster than any fixed rule resolves, so masses computed with a
    /// different rule need not agree with this one.
    pub fn cumulative(&self, x: f64) -> f64 {
        let q = GaussLegendre::new(self.quadrature_order);
        q.nodes()
            .iter()
            .zip(q.weights())
            .take_while(|(&t, _)| t <= x)
            .map(|(&t, &w)| w * self.density_unchecked(t))
            .sum::<f64>()
            .min(1.0)
    }

    /// Shifted-Chebyshev moments `1..=k` of the density. Stored moments are
    /// reused; higher ones are integrated with the solver quadrature.
    fn chebyshev_moments(&self, k: usize) -> Vec<f64> {
        let have = self.chebyshev.moments.len();
        if k <= have {
            return self.chebyshev.moments[..k].to_vec();
        }
        let q = GaussLegendre::new(self.quadrature_order.max(2 * k + 1));
        let mut out = vec![0.0; k];
        let mut phi = vec![0.0; k];
        for (&x, &w) in q.nodes().iter().zip(q.weights()) {
            let pw = w * self.density_unchecked(x);
            Basis::ChebyshevShifted.eval_into(x, &mut phi);
            for (acc, p) in out.iter_mut().zip(&phi) {
                *acc += pw * p;
            }
        }
        out[..have].copy_from_slice(&self.chebyshev.moments);
        out
    }

    /// Density on `points` equally spaced points over `[0, 1]`.
    pub fn grid(&self, points: usize) -> (Vec<f64>, Vec<f64>) {
        let grid = crate::baselines::unit_grid(points);
        let values = grid.iter().map(|&x| self.density_unchecked(x)).collect();
        (grid, values)
    }

    /// CSV with header `lambda,density`.
    pub fn write_density_csv<W: Write>(&self, points: usize, mut out: W) -> Result<()> {
        let (grid, values) = self.grid(points);
        writeln!(out, "lambda,density")?;
        for (x, p) in grid.iter().zip(&values) {
            writeln!(out, "{x:.7e},{p:.7e}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let record = SpectrumRecord {
            basis: self.basis,
            alpha0: self.alpha0,
            alpha: self.alpha.clone(),
            residual: self.residual,
            target_moments: self.target_moments.clone(),
            fitted_moments: self.fitted_moments.clone(),
            quadrature_order: self.quadrature_order,
            chebyshev: self.chebyshev.clone(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: SpectrumRecord = serde_json::from_str(s)?;
        if r.chebyshev.alpha.len() != r.alpha.len() || r.chebyshev.moments.len() != r.alpha.len() {
            return Err(Error::InvalidArgument(
                "inconsistent coefficient lengths".into(),
            ));
        }
        Ok(Self {
            basis: r.basis,
            alpha0: r.alpha0,
            alpha: r.alpha,
            target_moments: r.target_moments,
            fitted_moments: r.fitted_moments,
            residual: r.residual,
            chebyshev: r.chebyshev,
            quadrature_order: r.quadrature_order,
            iterations: 0,
            dual_history: Vec::new(),
        })
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

fn round(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Maps Chebyshev coefficients to monomial ones, folding the constant term
/// into `alpha0`.
fn chebyshev_to_power_coefficients(alpha0: f64, alpha: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let coeffs = shifted_chebyshev_coefficients(m);
    let mut power = vec![BigRational::zero(); m + 1];
    for (k, &a) in alpha.iter().enumerate() {
        let a = exact(a);
        for (j, c) in coeffs[k + 1].iter().enumerate() {
            power[j] += &a * BigRational::from_integer(c.clone());
        }
    }
    let a0 = exact(alpha0) + &power[0];
    (round(&a0), power[1..].iter().map(round).collect())
}

fn chebyshev_to_power_moments(moments: &[f64]) -> Vec<f64> {
    let mv = MomentVector::exact(Basis::ChebyshevShifted, moments.to_vec());
    basis_convert(&mv, Basis::Power)
        .map(|v| v.values)
        .unwrap_or_else(|_| vec![f64::NAN; moments.len()])
}

/// Maps monomial coefficients to Chebyshev ones (inverse of
/// [`chebyshev_to_power_coefficients`]).
#[allow(dead_code)]
fn power_to_chebyshev_coefficients(alpha0: f64, alpha: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let rows = monomial_in_chebyshev(m);
    let mut cheb = vec![BigRational::zero(); m + 1];
    let mut scale = BigRational::one();
    let quarter = BigRational::new(1.into(), 4.into());
    for (j, row) in rows.iter().enumerate().skip(1) {
        scale *= &quarter;
        let a = exact(alpha[j - 1]) * &scale;
        for (k, c) in row.iter().enumerate() {
            cheb[k] += &a * BigRational::from_integer(c.clone());
        }
    }
    let a0 = exact(alpha0) + &cheb[0];
    (round(&a0), cheb[1..].iter().map(round).collect())
}

/// Quadrature-discretized dual problem in the shifted-Chebyshev basis.
struct Dual<'a> {
    log_weights: Vec<f64>,
    /// Row-major `nodes x m` basis values.
    phi: Vec<f64>,
    m: usize,
    target: &'a [f64],
    /// Quadratic penalty on the Chebyshev coefficients.
    penalty: Option<DMatrix<f64>>,
}

struct DualEval {
    log_z: f64,
    value: f64,
    /// Normalized quadrature probabilities `w_k p(x_k)`.
    probs: Vec<f64>,
    moments: Vec<f64>,
    max_exponent: f64,
}

impl<'a> Dual<'a> {
    fn new(q: &GaussLegendre, target: &'a [f64], penalty: Option<DMatrix<f64>>) -> Self {
        let m = target.len();
        let mut phi = vec![0.0; q.order() * m];
        for (row, &x) in phi.chunks_mut(m.max(1)).zip(q.nodes()) {
            Basis::ChebyshevShifted.eval_into(x, &mut row[..m]);
        }
        Self {
            log_weights: q.weights().iter().map(|w| w.ln()).collect(),
            phi,
            m,
            target,
            penalty,
        }
    }

    fn penalty_value(&self, alpha: &[f64]) -> f64 {
        self.penalty.as_ref().map_or(0.0, |p| {
            let a = DVector::from_column_slice(alpha);
            0.5 * a.dot(&(p * &a))
        })
    }

    /// `mu - E_p[phi]` plus the penalty gradient.
    fn gradient(&self, alpha: &[f64], ev: &DualEval) -> Vec<f64> {
        let mut g: Vec<f64> = self
            .target
            .iter()
            .zip(&ev.moments)
            .map(|(t, e)| t - e)
            .collect();
        if let Some(p) = &self.penalty {
            let pa = p * DVector::from_column_slice(alpha);
            g.iter_mut().zip(pa.iter()).for_each(|(g, v)| *g += v);
        }
        g
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.phi[k * self.m..(k + 1) * self.m]
    }

    fn exponents(&self, alpha: &[f64]) -> Vec<f64> {
        (0..self.log_weights.len())
            .map(|k| {
                let q: f64 = self.row(k).iter().zip(alpha).map(|(p, a)| p * a).sum();
                self.log_weights[k] - q
            })
            .collect()
    }

    fn log_partition(&self, exponents: &[f64]) -> f64 {
        let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = exponents.iter().map(|e| (e - top).exp()).sum();
        top + s.ln()
    }

    fn value(&self, alpha: &[f64]) -> f64 {
        let e = self.exponents(alpha);
        self.log_partition(&e)
            + alpha
                .iter()
                .zip(self.target)
                .map(|(a, m)| a * m)
                .sum::<f64>()
            + self.penalty_value(alpha)
    }

    fn eval(&self, alpha: &[f64]) -> DualEval {
        let e = self.exponents(alpha);
        let log_z = self.log_partition(&e);
        let probs: Vec<f64> = e.iter().map(|x| (x - log_z).exp()).collect();
        let mut moments = vec![0.0; self.m];
        for (k, &p) in probs.iter().enumerate() {
            for (acc, v) in moments.iter_mut().zip(self.row(k)) {
                *acc += p * v;
            }
        }
        let max_exponent = e
            .iter()
            .zip(&self.log_weights)
            .map(|(x, lw)| x - lw - log_z)
            .fold(f64::NEG_INFINITY, f64::max);
        let value = log_z
            + alpha
                .iter()
                .zip(self.target)
                .map(|(a, m)| a * m)
                .sum::<f64>()
            + self.penalty_value(alpha);
        DualEval {
            log_z,
            value,
            probs,
            moments,
            max_exponent,
        }
    }

    fn hessian(&self, ev: &DualEval) -> DMatrix<f64> {
        let m = self.m;
        let mut h = DMatrix::<f64>::zeros(m, m);
        let mut centered = vec![0.0; m];
        for (k, &p) in ev.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for ((c, v), mu) in centered.iter_mut().zip(self.row(k)).zip(&ev.moments) {
                *c = v - mu;
            }
            for j in 0..m {
                let pj = p * centered[j];
                for i in j..m {
                    h[(i, j)] += pj * centered[i];
                }
            }
        }
        for j in 0..m {
            for i in j + 1..m {
                h[(j, i)] = h[(i, j)];
            }
        }
        if let Some(p) = &self.penalty {
            h += p;
        }
        h
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn check_finite(ev: &DualEval) -> Result<()> {
    if !ev.log_z.is_finite() || ev.max_exponent > MAX_EXPONENT || ev.max_exponent.is_nan() {
        return Err(Error::QuadratureOverflow {
            exponent: ev.max_exponent,
        });
    }
    Ok(())
}

/// Fits the maximum-entropy density whose basis expectations match `mv`.
pub fn maxent_fit(mv: &MomentVector, cfg: &SolverConfig) -> Result<EntropicSpectrum> {
    let m = mv.values.len();
    if m == 0 {
        return Err(Error::InvalidArgument(
            "at least one moment is required".into(),
        ));
    }
    cfg.validate(m)?;
    if mv.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("moments must be finite".into()));
    }
    let target = match mv.basis {
        Basis::ChebyshevShifted => mv.values.clone(),
        Basis::Power => basis_convert(mv, Basis::ChebyshevShifted)?.values,
    };

    let quad = GaussLegendre::new(cfg.quadrature_order);
    let dual = Dual::new(&quad, &target, noise_penalty(mv, cfg.noise_scale));
    let mut alpha = vec![0.0; m];
    let mut ev = dual.eval(&alpha);
    check_finite(&ev)?;
    let mut history = vec![ev.value];
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;

    loop {
        let grad = dual.gradient(&alpha, &ev);
        let residual = max_abs(&grad);
        best_residual = best_residual.min(residual);
        if residual <= cfg.tol {
            break;
        }
        if iterations >= cfg.max_iters {
            return Err(Error::NonConvergence {
                iterations,
                best_residual,
            });
        }
        iterations += 1;

        let step = newton_direction(&dual.hessian(&ev), &grad, cfg.ridge).ok_or(
            Error::NonConvergence {
                iterations,
                best_residual,
            },
        )?;
        let slope: f64 = grad.iter().zip(step.iter()).map(|(g, s)| g * s).sum();

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial: Vec<f64> = alpha
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + t * s)
                .collect();
            let value = dual.value(&trial);
            if value.is_finite() && value <= ev.value + cfg.armijo * t * slope {
                accepted = Some(trial);
                break;
            }
            // Near the optimum the decrease drops below rounding of F;
            // accept a step that still shrinks the residual.
            if value.is_finite() && value <= ev.value + 1e-14 * ev.value.abs().max(1.0) {
                let trial_ev = dual.eval(&trial);
                if max_abs(&dual.gradient(&trial, &trial_ev)) < residual {
                    accepted = Some(trial);
                    break;
                }
            }
            t *= cfg.shrink;
        }
        let Some(next) = accepted else {
            return Err(Error::NonConvergence {
                iterations,
                best_residual,
            });
        };
        alpha = next;
        let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > cfg.max_coefficient_norm {
            return Err(Error::NonConvergence {
                iterations,
                best_residual,
            });
        }
        ev = dual.eval(&alpha);
        check_finite(&ev)?;
        history.push(ev.value);
    }

    let chebyshev = ChebyshevForm {
        alpha0: ev.log_z,
        alpha,
        moments: ev.moments,
    };
    Ok(EntropicSpectrum::from_chebyshev(
        mv.basis,
        chebyshev,
        Some(mv.values.clone()),
        cfg.quadrature_order,
        iterations,
        history,
    ))
}

/// Penalty matrix on the Chebyshev coefficients induced by the standard
/// errors of `mv`, or `None` when the moments are exact.
fn noise_penalty(mv: &MomentVector, scale: f64) -> Option<DMatrix<f64>> {
    let m = mv.values.len();
    let se = mv.standard_errors();
    if scale == 0.0 || se.len() != m || se.iter().all(|&s| s == 0.0) {
        return None;
    }
    let weights = DVector::from_iterator(m, se.iter().map(|s| (scale * s).powi(2)));
    match mv.basis {
        Basis::ChebyshevShifted => Some(DMatrix::from_diagonal(&weights)),
        Basis::Power => {
            // Power coefficient j of the exponent is sum_k A[j][k] alpha_k.
            let coeffs = shifted_chebyshev_coefficients(m);
            let a = DMatrix::from_fn(m, m, |j, k| {
                coeffs[k + 1]
                    .get(j + 1)
                    .and_then(|c| c.to_f64())
                    .unwrap_or(0.0)
            });
            Some(a.transpose() * DMatrix::from_diagonal(&weights) * a)
        }
    }
}

/// Solves `(H + ridge I) s = -g`, raising the ridge tenfold on each
/// factorization failure.
fn newton_direction(h: &DMatrix<f64>, grad: &[f64], ridge: f64) -> Option<DVector<f64>> {
    let m = grad.len();
    let rhs = DVector::from_iterator(m, grad.iter().map(|g| -g));
    let mut jitter = ridge;
    for _ in 0..40 {
        let mut shifted = h.clone();
        for i in 0..m {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            let s = chol.solve(&rhs);
            if s.iter().all(|v| v.is_finite()) {
                return Some(s);
            }
        }
        jitter *= 10.0;
    }
    None
}

fn check_pair(p: &EntropicSpectrum, q: &EntropicSpectrum) -> Result<usize> {
    if p.basis != q.basis {
        return Err(Error::BasisMismatch {
            left: p.basis,
            right: q.basis,
        });
    }
    Ok(p.m().max(q.m()))
}

fn padded(v: &[f64], len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(len, 0.0);
    out
}

/// `KL(p || q) = (beta0 - alpha0) + sum_i (beta_i - alpha_i) E_p[phi_i]`.
pub fn kl_divergence(p: &EntropicSpectrum, q: &EntropicSpectrum) -> Result<f64> {
    let k = check_pair(p, q)?;
    let a = padded(&p.chebyshev.alpha, k);
    let b = padded(&q.chebyshev.alpha, k);
    let mu = p.chebyshev_moments(k);
    let linear: f64 = (0..k).map(|i| (b[i] - a[i]) * mu[i]).sum();
    Ok(q.chebyshev.alpha0 - p.chebyshev.alpha0 + linear)
}

/// `(KL(p || q) + KL(q || p)) / 2 = sum_i (alpha_i - beta_i)(mu_i^q - mu_i^p) / 2`.
pub fn symmetric_kl(p: &EntropicSpectrum, q: &EntropicSpectrum) -> Result<f64> {
    let k = check_pair(p, q)?;
    let a = padded(&p.chebyshev.alpha, k);
    let b = padded(&q.chebyshev.alpha, k);
    let mp = p.chebyshev_moments(k);
    let mq = q.chebyshev_moments(k);
    Ok(0.5 * (0..k).map(|i| (a[i] - b[i]) * (mq[i] - mp[i])).sum::<f64>())
}

/// Differential entropy of a fitted spectrum.
pub fn differential_entropy(es: &EntropicSpectrum) -> f64 {
    es.differential_entropy()
}
