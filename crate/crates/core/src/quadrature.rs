//! Gauss-Legendre rules and their composite versions on intervals and
//! rectangles.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels with
/// `order` nodes each.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Nodes per panel used by the default composite rule.
pub const PANEL_ORDER: usize = 16;

/// Default total node count per dimension.
pub const DEFAULT_NODES: usize = 256;

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let base = GaussLegendre::new(order);
        let width = (b - a) / panels as f64;
        let mut points = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let mid = lo + 0.5 * width;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                points.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Self { points, weights }
    }

    /// Rule with (about) `nodes` total points, split into 16-point panels.
    pub fn with_nodes(a: f64, b: f64, nodes: usize) -> Self {
        let order = PANEL_ORDER.min(nodes.max(1));
        let panels = nodes.div_ceil(order).max(1);
        Self::new(a, b, panels, order)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Integrates `f` over [a, b] with the default composite rule.
pub fn integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    if a == b {
        return 0.0;
    }
    CompositeRule::with_nodes(a, b, DEFAULT_NODES).integrate(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        for n in 1..=20 {
            let rule = GaussLegendre::new(n);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            // degree 2n-1 monomial x^(2n-2) integrates to 2/(2n-1)
            let deg = 2 * n - 2;
            let q: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            assert!((q - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn composite_sine_integral() {
        let v = integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
        let rule = CompositeRule::with_nodes(0.0, 1.0, 256);
        assert_eq!(rule.len(), 256);
    }
}
