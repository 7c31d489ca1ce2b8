//! Gauss–Legendre quadrature and semicircle expectations.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        s * half
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let s: Complex64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(mid + half * x) * *w)
            .sum();
        s * half
    }

    /// Composite rule over `panels` equal sub-intervals of [a, b].
    pub fn integrate_composite_complex<F: Fn(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        f: F,
    ) -> Complex64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate_complex(lo, lo + h, &f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const SEMICIRCLE_RULE_POINTS: usize = 32;
const SEMICIRCLE_MAX_PANELS: usize = 4096;

/// `E[f(s)]` for `s` semicircular with variance `sigma^2`.
///
/// Uses the substitution `t = 2 sigma sin u`, which turns the square-root
/// endpoint behaviour of the density into a smooth `cos^2 u` weight, then
/// doubles the number of composite panels until successive estimates agree
/// to `tol` (absolute, relative to the size of the result).
pub fn semicircle_expectation<F>(sigma: f64, tol: f64, f: F) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let rule = GaussLegendre::new(SEMICIRCLE_RULE_POINTS);
    let integrand = |u: f64| {
        let c = u.cos();
        f(2.0 * sigma * u.sin()) * (2.0 / PI * c * c)
    };
    let mut panels = 2;
    let mut prev = rule.integrate_composite_complex(-FRAC_PI_2, FRAC_PI_2, panels, integrand);
    loop {
        panels *= 2;
        let next = rule.integrate_composite_complex(-FRAC_PI_2, FRAC_PI_2, panels, integrand);
        let scale = next.norm().max(1.0);
        if (next - prev).norm() <= tol * scale || panels >= SEMICIRCLE_MAX_PANELS {
            return next;
        }
        prev = next;
    }
}
