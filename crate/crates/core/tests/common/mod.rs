//! Shared helpers for the integration oracles. Everything here is written
//! from first principles — its own Gauss–Legendre rule, its own direct
//! Fourier sums — so agreement with the library is evidence, not tautology.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess for the i-th root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre P_n and its derivative at x via the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss–Legendre integral of `f` over [a, b] with uniform panels.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (xs, ws) = legendre_rule(order);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let left = a + p as f64 * h;
        let mid = left + 0.5 * h;
        for (&x, &w) in xs.iter().zip(&ws) {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    acc * 0.5 * h
}

/// The compactly supported profile used throughout: b(s) = exp(1 − 1/(1−s²))
/// inside |s| < 1 and 0 outside.
pub fn bump(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// Direct O(n⁴) evaluation of the orthonormal torus coefficients
/// c_k = (2π/n²) Σ_j f(x_j) e^{−ik·x_j}, x_j = −π + 2πj/n, FFT bin layout
/// (row-major over (bin₁, bin₂), bin b ↔ mode b for b < n/2 else b − n).
pub fn direct_coeffs_2d(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let scale = 2.0 * PI / (n * n) as f64;
    for b1 in 0..n {
        let k1 = mode(b1, n);
        for b2 in 0..n {
            let k2 = mode(b2, n);
            let mut acc = Complex64::new(0.0, 0.0);
            for j1 in 0..n {
                let x1 = -PI + 2.0 * PI * j1 as f64 / n as f64;
                for j2 in 0..n {
                    let x2 = -PI + 2.0 * PI * j2 as f64 / n as f64;
                    let phase = -(k1 as f64 * x1 + k2 as f64 * x2);
                    acc += values[j1 * n + j2] * Complex64::from_polar(1.0, phase);
                }
            }
            out[b1 * n + b2] = scale * acc;
        }
    }
    out
}

/// Direct synthesis inverse of [`direct_coeffs_2d`]:
/// f(x_j) = (1/2π) Σ_k c_k e^{ik·x_j}.
pub fn direct_values_2d(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for j1 in 0..n {
        let x1 = -PI + 2.0 * PI * j1 as f64 / n as f64;
        for j2 in 0..n {
            let x2 = -PI + 2.0 * PI * j2 as f64 / n as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for b1 in 0..n {
                let k1 = mode(b1, n);
                for b2 in 0..n {
                    let k2 = mode(b2, n);
                    let phase = k1 as f64 * x1 + k2 as f64 * x2;
                    acc += coeffs[b1 * n + b2] * Complex64::from_polar(1.0, phase);
                }
            }
            out[j1 * n + j2] = acc / (2.0 * PI);
        }
    }
    out
}

pub fn mode(bin: usize, n: usize) -> i64 {
    if bin < n / 2 {
        bin as i64
    } else {
        bin as i64 - n as i64
    }
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Relative difference against the larger magnitude (0 when both vanish).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
