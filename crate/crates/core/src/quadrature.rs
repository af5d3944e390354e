//! Gauss-Legendre quadrature on the unit interval.

use std::f64::consts::PI;

/// Gauss-Legendre rule mapped to `[0, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `order`-point rule, exact for polynomials of degree `2 * order - 1`.
    ///
    /// Nodes are found by Newton iteration on the three-term Legendre
    /// recurrence, started from the Tricomi asymptotic guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // x is the i-th largest root on [-1, 1].
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            nodes[i] = 0.5 * (1.0 - x);
            weights[n - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights affinely mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let len = b - a;
        (
            self.nodes.iter().map(|&x| a + len * x).collect(),
            self.weights.iter().map(|&w| len * w).collect(),
        )
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn integrate_over<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        len * self.integrate(|x| f(a + len * x))
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_nodes_ascend() {
        for order in [1, 2, 5, 64, 512, 1024] {
            let q = GaussLegendre::new(order);
            let s: f64 = q.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "order {order}: {s}");
            assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(q.nodes()[0] > 0.0 && *q.nodes().last().unwrap() < 1.0);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let q = GaussLegendre::new(10);
        for k in 0..20 {
            let got = q.integrate(|x| x.powi(k));
            let want = 1.0 / (k as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn smooth_integrands() {
        let q = GaussLegendre::new(512);
        assert!((q.integrate(|x| (-x).exp()) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let got = q.integrate_over(0.0, PI, f64::sin);
        assert!((got - 2.0).abs() < 1e-13);
        // Sharply peaked integrand near the left endpoint.
        let got = q.integrate(|x| 1e3 * (-1e3 * x).exp());
        assert!((got - (1.0 - (-1e3f64).exp())).abs() < 1e-12, "{got}");
    }

    #[test]
    fn two_point_rule() {
        let q = GaussLegendre::new(2);
        let r = 0.5 / 3f64.sqrt();
        assert!((q.nodes()[0] - (0.5 - r)).abs() < 1e-15);
        assert!((q.weights()[1] - 0.5).abs() < 1e-15);
    }
}
