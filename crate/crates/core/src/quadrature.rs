//! Gauss-Legendre quadrature on the unit interval.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, located by Newton's
//! method from the asymptotic guess `cos(pi (i - 1/4) / (n + 1/2))`, with `P_n`
//! and its derivative evaluated by the three-term recurrence.

use std::sync::OnceLock;

/// Number of nodes used for every integral over [0, 1] in this crate.
pub const DEFAULT_NODES: usize = 128;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule mapped to [0, 1].
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // x runs from near +1 downwards; store ascending on [0, 1]
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            nodes[i] = 0.5 * (1.0 - x);
            weights[n - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    /// Shared 128-node rule.
    pub fn unit() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(DEFAULT_NODES))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over [0, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral of `f` over [a, b].
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        h * self.integrate(|t| f(a + h * t))
    }
}

/// `P_n(x)` and `P_n'(x)` on [-1, 1].
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
