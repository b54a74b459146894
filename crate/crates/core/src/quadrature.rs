//! Gauss–Legendre and uniform trapezoidal rules.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;


/// Nodes per panel of the composite Gauss–Legendre rule.
pub const PANEL_ORDER: usize = 32;

/// A quadrature rule: nodes in increasing order and their positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots are found by Newton iteration from Tricomi's initial guess; the rule
/// integrates polynomials of degree `2n - 1` exactly.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out in decreasing order
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Composite Gauss–Legendre rule with exactly `total` nodes on `[a, b]`.
///
/// The interval is split into `max(1, total / PANEL_ORDER)` equal panels and
/// the nodes are spread over them as evenly as possible, so each panel carries
/// at least `PANEL_ORDER` nodes unless `total` itself is smaller.
pub fn composite_gauss_legendre(a: f64, b: f64, total: usize) -> Rule {
    assert!(total > 0 && b > a);
    let panels = (total / PANEL_ORDER).max(1);
    let base = total / panels;
    let extra = total % panels;
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut cached: Option<(usize, Rule)> = None;
    for p in 0..panels {
        let order = base + usize::from(p < extra);
        let rule = match &cached {
            Some((n, r)) if *n == order => r.clone(),
            _ => {
                let r = gauss_legendre(order);
                cached = Some((order, r.clone()));
                r
            }
        };
        let left = a + width * p as f64;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push(left + 0.5 * width * (x + 1.0));
            weights.push(0.5 * width * w);
        }
    }
    Rule { nodes, weights }
}

/// Panel layout of a composite rule: `(start, len)` of each panel in node order.
pub fn composite_panels(total: usize) -> Vec<(usize, usize)> {
    let panels = (total / PANEL_ORDER).max(1);
    let base = total / panels;
    let extra = total % panels;
    let mut out = Vec::with_capacity(panels);
    let mut start = 0;
    for p in 0..panels {
        let len = base + usize::from(p < extra);
        out.push((start, len));
        start += len;
    }
    out
}

/// Uniform `n`-point rule on `[start, start + period)` with equal weights.
///
/// Exact for trigonometric polynomials of degree below `n` on the period.
pub fn periodic_trapezoid(start: f64, period: f64, n: usize) -> Rule {
    assert!(n > 0 && period > 0.0);
    let h = period / n as f64;
    Rule {
        nodes: (0..n).map(|i| start + h * i as f64).collect(),
        weights: vec![h; n],
    }
}
