//! Composite Gauss–Legendre quadrature with spectral cumulative integration.
//!
//! Each panel carries an `n`-point Gauss–Legendre rule plus the matrix
//! `S[i][j] = ∫_{-1}^{x_i} ℓ_j(x) dx` of integrated Lagrange basis
//! polynomials. Multiplying `S` by integrand samples at the nodes gives the
//! running integral at every node with the same order of accuracy as the
//! rule itself, so nested integrals `∫₀ᵗ g(t') ∫₀^{t'} h` can be evaluated
//! level by level on one shared grid.

use std::sync::OnceLock;

/// Default number of nodes per panel.
pub const DEFAULT_ORDER: usize = 12;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<Vec<f64>>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "Gauss-Legendre order must be at least 2");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }

        let cumulative = nodes
            .iter()
            .map(|&xi| {
                let half = 0.5 * (xi + 1.0);
                (0..n)
                    .map(|j| {
                        nodes
                            .iter()
                            .zip(&weights)
                            .map(|(&y, &w)| w * lagrange(&nodes, j, -1.0 + half * (y + 1.0)))
                            .sum::<f64>()
                            * half
                    })
                    .collect()
            })
            .collect();

        Self { nodes, weights, cumulative }
    }

    /// Shared rule of [`DEFAULT_ORDER`].
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
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
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn lagrange(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| (x - xk) / (nodes[j] - xk))
        .product()
}

/// Composite rule over `[edges[0], edges.last()]` with one Gauss–Legendre
/// rule per panel. Nodes are stored panel by panel in increasing order.
#[derive(Debug, Clone)]
pub struct CompositeGrid {
    rule: &'static GaussLegendre,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeGrid {
    /// Splits every segment between consecutive `breakpoints` into
    /// `panels_per_segment` equal panels. Breakpoints must be increasing.
    pub fn new(breakpoints: &[f64], panels_per_segment: usize) -> Self {
        Self::with_rule(GaussLegendre::standard(), breakpoints, panels_per_segment)
    }

    pub fn with_rule(
        rule: &'static GaussLegendre,
        breakpoints: &[f64],
        panels_per_segment: usize,
    ) -> Self {
        assert!(breakpoints.len() >= 2 && panels_per_segment >= 1);
        let mut edges = Vec::with_capacity((breakpoints.len() - 1) * panels_per_segment + 1);
        edges.push(breakpoints[0]);
        for pair in breakpoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for k in 1..=panels_per_segment {
                edges.push(if k == panels_per_segment {
                    b
                } else {
                    a + (b - a) * k as f64 / panels_per_segment as f64
                });
            }
        }
        let n = rule.order();
        let mut nodes = Vec::with_capacity((edges.len() - 1) * n);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let half = 0.5 * (pair[1] - pair[0]);
            for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Self { rule, edges, nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn panel_count(&self) -> usize {
        self.edges.len() - 1
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }

    /// Running integrals from the left end of the grid.
    ///
    /// Returns `(at_nodes, at_edges)` where `at_nodes[k] = ∫_{a}^{x_k}` and
    /// `at_edges[p] = ∫_{a}^{edge_p}`.
    pub fn cumulative(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(values.len(), self.nodes.len());
        let n = self.rule.order();
        let mut at_nodes = Vec::with_capacity(values.len());
        let mut at_edges = Vec::with_capacity(self.edges.len());
        let mut running = 0.0;
        at_edges.push(0.0);
        for (p, pair) in self.edges.windows(2).enumerate() {
            let half = 0.5 * (pair[1] - pair[0]);
            let chunk = &values[p * n..(p + 1) * n];
            for row in &self.rule.cumulative {
                let partial: f64 = row.iter().zip(chunk).map(|(s, v)| s * v).sum();
                at_nodes.push(running + half * partial);
            }
            let panel: f64 = self.rule.weights().iter().zip(chunk).map(|(w, v)| w * v).sum();
            running += half * panel;
            at_edges.push(running);
        }
        (at_nodes, at_edges)
    }
}

/// Repeatedly doubles the panel count until two successive estimates agree.
///
/// `eval(panels)` returns the estimate and a magnitude scale used for the
/// relative test (typically the integral of the absolute integrand).
/// Returns the finest estimate and the panel count that produced it.
pub fn refine<F>(start_panels: usize, max_panels: usize, rel_tol: f64, mut eval: F) -> (f64, usize)
where
    F: FnMut(usize) -> (f64, f64),
{
    let mut panels = start_panels.max(1);
    let (mut prev, _) = eval(panels);
    loop {
        let next_panels = panels * 2;
        let (next, scale) = eval(next_panels);
        panels = next_panels;
        let tol = rel_tol * scale.abs().max(next.abs()).max(f64::MIN_POSITIVE);
        if (next - prev).abs() <= tol || panels >= max_panels {
            return (next, panels);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights_integrate_polynomials_exactly() {
        let rule = GaussLegendre::new(DEFAULT_ORDER);
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..(2 * DEFAULT_ORDER) {
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            assert!((got - exact).abs() < 1e-14, "degree {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn odd_order_has_center_node() {
        let rule = GaussLegendre::new(11);
        assert_eq!(rule.nodes()[5], 0.0);
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let grid = CompositeGrid::new(&[-1.0, 0.0, 2.0], 16);
        let values = grid.sample(|x| x.cos());
        let (at_nodes, at_edges) = grid.cumulative(&values);
        for (x, c) in grid.nodes().iter().zip(&at_nodes) {
            let exact = x.sin() - (-1.0f64).sin();
            assert!((c - exact).abs() < 1e-14, "{x}: {c} vs {exact}");
        }
        let total = 2.0f64.sin() + 1.0f64.sin();
        assert!((at_edges.last().unwrap() - total).abs() < 1e-14);
        assert!((grid.integrate(&values) - total).abs() < 1e-14);
    }

    #[test]
    fn nested_cumulative_integrals() {
        // ∫₀¹ x ∫₀ˣ y dy dx = 1/8
        let grid = CompositeGrid::new(&[0.0, 1.0], 4);
        let (inner, _) = grid.cumulative(&grid.sample(|y| y));
        let outer: Vec<f64> = grid.nodes().iter().zip(&inner).map(|(x, i)| x * i).collect();
        assert!((grid.integrate(&outer) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn refine_stops_on_agreement() {
        let (value, panels) = refine(4, 1 << 12, 1e-13, |n| {
            let grid = CompositeGrid::new(&[0.0, 30.0], n);
            (grid.integrate_fn(|x| (5.0 * x).cos()), 30.0)
        });
        assert!((value - (150.0f64).sin() / 5.0).abs() < 1e-12);
        assert!(panels <= 256);
    }
}
