//! Gauss–Legendre quadrature with composite panels and refinement-based
//! error estimates.
//!
//! All smooth integrands in this crate are bump functions or trigonometric
//! profiles; composite Gauss–Legendre panels aligned to support boundaries
//! converge super-algebraically for them, so the difference between two
//! successive refinement levels is a reliable (over-)estimate of the error
//! of the finer level.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Newton iteration on the Legendre recurrence; nodes are symmetric and
/// converge to machine precision in a handful of iterations.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: p_k(x), derivative from the standard identity.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `f` over [a, b] with `panels` equal panels of an `nodes`-point
/// Gauss–Legendre rule each.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    let (xs, ws) = gauss_legendre(nodes);
    integrate_with_rule(&f, a, b, panels, &xs, &ws)
}

/// Same as [`integrate`] but reusing precomputed Gauss–Legendre nodes.
pub fn integrate_with_rule<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    xs: &[f64],
    ws: &[f64],
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (&x, &w) in xs.iter().zip(ws) {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

/// Integrates over panels whose edges are given explicitly. Edges must be
/// non-decreasing; degenerate panels contribute zero.
pub fn integrate_edges<F: Fn(f64) -> f64>(f: &F, edges: &[f64], xs: &[f64], ws: &[f64]) -> f64 {
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi > lo {
            total += integrate_with_rule(f, lo, hi, 1, xs, ws);
        }
    }
    total
}

/// Builds a clean edge list for [`integrate_edges`]: keeps `a`, `b` and the
/// interior breakpoints that fall strictly inside (a, b), sorted and with
/// near-duplicates (within 1e−12) merged.
pub fn clean_edges(breakpoints: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut edges = vec![a];
    let mut interior: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a + 1e-12 && p < b - 1e-12)
        .collect();
    interior.sort_by(f64::total_cmp);
    for p in interior {
        if p - edges.last().unwrap() > 1e-12 {
            edges.push(p);
        }
    }
    edges.push(b);
    edges
}

/// Splits every panel of an edge list into `sub` equal sub-panels.
pub fn subdivide_edges(edges: &[f64], sub: usize) -> Vec<f64> {
    assert!(sub >= 1);
    let mut out = Vec::with_capacity((edges.len() - 1) * sub + 1);
    out.push(edges[0]);
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for s in 1..=sub {
            out.push(lo + (hi - lo) * s as f64 / sub as f64);
        }
    }
    out
}

/// Value sequence over successive refinement levels together with the
/// level-difference error estimates.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Refinement {
    /// Integral value per level, coarsest first.
    pub values: Vec<f64>,
    /// |values[i] − values[i−1]| for i ≥ 1; estimates the error of level i−1
    /// and (for super-algebraically convergent integrands) over-estimates the
    /// error of level i.
    pub error_estimates: Vec<f64>,
}

impl Refinement {
    pub fn from_values(values: Vec<f64>) -> Self {
        let error_estimates = values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .collect();
        Refinement {
            values,
            error_estimates,
        }
    }

    /// Finest-level value.
    pub fn value(&self) -> f64 {
        *self.values.last().expect("refinement holds at least one level")
    }

    /// Error estimate attached to the finest level.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimates.last().copied().unwrap_or(f64::NAN)
    }
}
