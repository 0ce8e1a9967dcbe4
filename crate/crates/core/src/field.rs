//! Complex spectral fields on the torus and on the slab.
//!
//! Coefficients are taken against orthonormal bases:
//! e_k(x) = e^{ik·x}/(2π) in x (k ∈ ℤ², FFT bin layout) and
//! e_m(z) = √(2/π) sin(m(z+π/2)) in z (m = 1..nz). With the sample points of
//! [`TorusGrid`]/[`SlabGrid`] both transforms are exactly unitary on the grid,
//! so the discrete quadrature L² norm equals the coefficient ℓ² norm to
//! roundoff (Parseval without bookkeeping factors).

use crate::grid::{SlabGrid, TorusGrid};
use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 2D DFT of an n×n row-major buffer, in place.
/// Forward kernel e^{−2πi k·j/n}, inverse kernel e^{+2πi k·j/n}; the
/// forward-then-inverse composition scales by n².
pub(crate) fn fft2_unnormalized(buf: &mut [Complex64], n: usize, forward: bool) {
    debug_assert_eq!(buf.len(), n * n);
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    transpose_square(buf, n);
    fft.process_with_scratch(buf, &mut scratch);
    transpose_square(buf, n);
}

/// Physical samples at x_j = −π + 2πj/n to orthonormal coefficients
/// c_k = ⟨f, e_k⟩, FFT bin layout. The sample offset −π contributes the
/// alternating sign (−1)^{k₁+k₂}.
pub(crate) fn values_to_coeffs_2d(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    fft2_unnormalized(&mut buf, n, true);
    let scale = 2.0 * PI / (n * n) as f64;
    for b1 in 0..n {
        for b2 in 0..n {
            let sign = if (b1 + b2) % 2 == 0 { scale } else { -scale };
            buf[b1 * n + b2] *= sign;
        }
    }
    buf
}

/// Inverse of [`values_to_coeffs_2d`].
pub(crate) fn coeffs_to_values_2d(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    for b1 in 0..n {
        for b2 in 0..n {
            if (b1 + b2) % 2 == 1 {
                buf[b1 * n + b2] = -buf[b1 * n + b2];
            }
        }
    }
    fft2_unnormalized(&mut buf, n, false);
    let scale = 1.0 / (2.0 * PI);
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

fn z_forward_complex(grid: &SlabGrid, lane: &[Complex64], out: &mut [Complex64]) {
    let nz = grid.nz();
    let scale = (2.0 / PI).sqrt() * grid.dz();
    for m in 1..=nz {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in lane.iter().enumerate() {
            acc += grid.sine(m, j) * v;
        }
        out[m - 1] = scale * acc;
    }
}

fn z_inverse_complex(grid: &SlabGrid, coeffs: &[Complex64], out: &mut [Complex64]) {
    let nz = grid.nz();
    let scale = (2.0 / PI).sqrt();
    for o in out.iter_mut() {
        *o = Complex64::new(0.0, 0.0);
    }
    for m in 1..=nz {
        let c = scale * coeffs[m - 1];
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o += c * grid.sine(m, j);
        }
    }
}

/// 3D samples (plane-major layout `[jz·nx² + j1·nx + j2]`) to coefficients
/// C(k, m) stored as `[(m−1)·nx² + bin(k₁)·nx + bin(k₂)]`.
pub(crate) fn values_to_coeffs_3d(grid: &SlabGrid, values: &[Complex64]) -> Vec<Complex64> {
    let n = grid.nx();
    let nz = grid.nz();
    let plane = n * n;
    let mut planes = values.to_vec();
    for chunk in planes.chunks_exact_mut(plane) {
        let c = values_to_coeffs_2d(chunk, n);
        chunk.copy_from_slice(&c);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); plane * nz];
    let mut lane = vec![Complex64::new(0.0, 0.0); nz];
    let mut zc = vec![Complex64::new(0.0, 0.0); nz];
    for p in 0..plane {
        for (j, l) in lane.iter_mut().enumerate() {
            *l = planes[j * plane + p];
        }
        z_forward_complex(grid, &lane, &mut zc);
        for (m, c) in zc.iter().enumerate() {
            out[m * plane + p] = *c;
        }
    }
    out
}

/// Inverse of [`values_to_coeffs_3d`].
pub(crate) fn coeffs_to_values_3d(grid: &SlabGrid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = grid.nx();
    let nz = grid.nz();
    let plane = n * n;
    let mut out = vec![Complex64::new(0.0, 0.0); plane * nz];
    let mut zc = vec![Complex64::new(0.0, 0.0); nz];
    let mut lane = vec![Complex64::new(0.0, 0.0); nz];
    for p in 0..plane {
        for (m, c) in zc.iter_mut().enumerate() {
            *c = coeffs[m * plane + p];
        }
        z_inverse_complex(grid, &zc, &mut lane);
        for (j, l) in lane.iter().enumerate() {
            out[j * plane + p] = *l;
        }
    }
    for chunk in out.chunks_exact_mut(plane) {
        let v = coeffs_to_values_2d(chunk, n);
        chunk.copy_from_slice(&v);
    }
    out
}

fn all_finite(values: &[Complex64]) -> bool {
    values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Complex field on the periodic square, stored as physical samples
/// `values[j1·n + j2] = f(x_{j1}, x_{j2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl Field2D {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples for a {0}×{0} grid, got {1}",
                grid.n(),
                values.len()
            )));
        }
        Ok(Field2D { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        let len = grid.len();
        Field2D {
            grid,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for j1 in 0..n {
            let x1 = grid.point(j1);
            for j2 in 0..n {
                values.push(f(x1, grid.point(j2)));
            }
        }
        Field2D { grid, values }
    }

    /// Build from orthonormal coefficients in FFT bin layout.
    pub fn from_coeffs(grid: TorusGrid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if !all_finite(coeffs) {
            return Err(Error::NonFiniteSamples("2D coefficients".into()));
        }
        let values = coeffs_to_values_2d(coeffs, grid.n());
        Ok(Field2D { grid, values })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Orthonormal coefficients c_k = ⟨f, e_k⟩ in FFT bin layout.
    /// Satisfies Parseval: Σ|c_k|² equals the quadrature ‖f‖²_{L²} exactly.
    pub fn coeffs(&self) -> Result<Vec<Complex64>> {
        if !all_finite(&self.values) {
            return Err(Error::NonFiniteSamples("2D field values".into()));
        }
        Ok(values_to_coeffs_2d(&self.values, self.grid.n()))
    }

    /// Coefficient of the basis function e_k, for integer modes |k_i| < n/2.
    pub fn coeff(&self, k1: i64, k2: i64) -> Result<Complex64> {
        let c = self.coeffs()?;
        Ok(c[self.grid.bin(k1) * self.grid.n() + self.grid.bin(k2)])
    }

    /// Quadrature L² norm; exact for any grid function by discrete Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (self.grid.weight() * s).sqrt()
    }

    /// Quadrature L⁴ norm. Exact when the spectrum is confined to modes
    /// |k_i| ≤ B with 4B < n (|f|⁴ then stays below the aliasing wheel).
    pub fn l4_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr().powi(2)).sum();
        (self.grid.weight() * s).powf(0.25)
    }

    /// Inhomogeneous Sobolev norm ‖√(1−Δ) f‖_{L²} = (Σ (1+|k|²)|c_k|²)^{1/2}.
    pub fn h1_norm(&self) -> Result<f64> {
        let coeffs = self.coeffs()?;
        let n = self.grid.n();
        let mut acc = 0.0;
        for b1 in 0..n {
            let k1 = self.grid.mode(b1) as f64;
            for b2 in 0..n {
                let k2 = self.grid.mode(b2) as f64;
                acc += (1.0 + k1 * k1 + k2 * k2) * coeffs[b1 * n + b2].norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// Sesquilinear pairing ⟨f, g⟩ = ∫ f ḡ (linear in `self`, conjugate-linear
    /// in `other`), by the exact grid quadrature.
    pub fn inner_product(&self, other: &Field2D) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("inner product across different grids".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b.conj();
        }
        Ok(self.grid.weight() * acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Rescale to unit L² norm.
    pub fn normalized(&self) -> Result<Field2D> {
        let n = self.l2_norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NonFiniteSamples(format!(
                "cannot normalize a field with L² norm {n}"
            )));
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v /= n;
        }
        Ok(out)
    }
}

/// Complex field on the slab, stored as physical samples in plane-major
/// layout `values[jz·nx² + j1·nx + j2] = f(x_{j1}, x_{j2}, z_{jz})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3D {
    grid: SlabGrid,
    values: Vec<Complex64>,
}

impl Field3D {
    pub fn new(grid: SlabGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples for a {}×{}×{} slab, got {}",
                grid.len(),
                grid.nx(),
                grid.nx(),
                grid.nz(),
                values.len()
            )));
        }
        Ok(Field3D { grid, values })
    }

    pub fn zeros(grid: SlabGrid) -> Self {
        let len = grid.len();
        Field3D {
            grid,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(grid: SlabGrid, mut f: impl FnMut(f64, f64, f64) -> Complex64) -> Self {
        let n = grid.nx();
        let nz = grid.nz();
        let mut values = Vec::with_capacity(n * n * nz);
        for jz in 0..nz {
            let z = grid.z_point(jz);
            for j1 in 0..n {
                let x1 = grid.torus().point(j1);
                for j2 in 0..n {
                    values.push(f(x1, grid.torus().point(j2), z));
                }
            }
        }
        Field3D { grid, values }
    }

    /// Tensor product u(x)·e_m(z) with e_m the orthonormal Dirichlet mode.
    pub fn from_transverse_mode(u: &Field2D, grid: SlabGrid, m: usize) -> Result<Self> {
        if u.grid() != grid.torus() {
            return Err(Error::ShapeMismatch(
                "2D profile grid does not match the slab torus".into(),
            ));
        }
        if m == 0 || m > grid.nz() {
            return Err(Error::InvalidGrid(format!(
                "transverse mode {m} outside 1..={}",
                grid.nz()
            )));
        }
        let plane = grid.torus().len();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for jz in 0..grid.nz() {
            let e = grid.basis_z(m, jz);
            for (p, uv) in u.values().iter().enumerate() {
                values[jz * plane + p] = e * uv;
            }
        }
        Ok(Field3D { grid, values })
    }

    /// Build from coefficients C(k, m) in layout `[(m−1)·nx² + bin layout]`.
    pub fn from_coeffs(grid: SlabGrid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if !all_finite(coeffs) {
            return Err(Error::NonFiniteSamples("3D coefficients".into()));
        }
        let values = coeffs_to_values_3d(&grid, coeffs);
        Ok(Field3D { grid, values })
    }

    pub fn grid(&self) -> &SlabGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Coefficients C(k, m) = ⟨f, e_k ⊗ e_m⟩; Parseval-exact on the grid.
    pub fn coeffs(&self) -> Result<Vec<Complex64>> {
        if !all_finite(&self.values) {
            return Err(Error::NonFiniteSamples("3D field values".into()));
        }
        Ok(values_to_coeffs_3d(&self.grid, &self.values))
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (self.grid.weight() * s).sqrt()
    }

    /// Mixed norm sup_z ∫|f| dx by grid quadrature in x and max over z nodes.
    pub fn mixed_norm_sup_l1(&self) -> f64 {
        let plane = self.grid.torus().len();
        let wx = self.grid.torus().weight();
        self.values
            .chunks_exact(plane)
            .map(|ch| wx * ch.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn inner_product(&self, other: &Field3D) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("inner product across different grids".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b.conj();
        }
        Ok(self.grid.weight() * acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Result<Field3D> {
        let n = self.l2_norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NonFiniteSamples(format!(
                "cannot normalize a field with L² norm {n}"
            )));
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v /= n;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_field_has_single_coefficient() {
        let g = TorusGrid::new(8).unwrap();
        let f = Field2D::from_fn(g.clone(), |_, _| c(0.7, -0.2));
        let coeffs = f.coeffs().unwrap();
        // ⟨const, e_0⟩ = const·2π; all other coefficients vanish.
        assert_relative_eq!(coeffs[0].re, 0.7 * 2.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(coeffs[0].im, -0.2 * 2.0 * PI, max_relative = 1e-13);
        for (i, ck) in coeffs.iter().enumerate().skip(1) {
            assert!(ck.norm() < 1e-12, "bin {i} leaked {}", ck.norm());
        }
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = TorusGrid::new(8).unwrap();
        let f = Field2D::from_fn(g.clone(), |x1, _| (c(0.0, 1.0) * x1).exp());
        let coeffs = f.coeffs().unwrap();
        let n = g.n();
        let hit = g.bin(1) * n + g.bin(0);
        assert_relative_eq!(coeffs[hit].re, 2.0 * PI, max_relative = 1e-13);
        assert!(coeffs[hit].im.abs() < 1e-12);
        for (i, ck) in coeffs.iter().enumerate() {
            if i != hit {
                assert!(ck.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = TorusGrid::new(16).unwrap();
        let f = Field2D::from_fn(g, |x, y| {
            c((2.0 * x).cos() * (y).sin(), (x + 0.3 * y).sin())
        });
        let coeffs = f.coeffs().unwrap();
        let back = Field2D::from_coeffs(f.grid().clone(), &coeffs).unwrap();
        let mut max_err: f64 = 0.0;
        for (a, b) in f.values().iter().zip(back.values()) {
            max_err = max_err.max((a - b).norm());
        }
        assert!(max_err < 1e-12, "round trip error {max_err}");
        let l2_coeff: f64 = coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(f.l2_norm(), l2_coeff, max_relative = 1e-12);
    }

    #[test]
    fn norms_of_normalized_constant() {
        let g = TorusGrid::new(8).unwrap();
        let f = Field2D::from_fn(g, |_, _| c(1.0 / (2.0 * PI), 0.0));
        assert_relative_eq!(f.l2_norm(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(f.l4_norm(), (2.0 * PI).powf(-0.5), max_relative = 1e-13);
        // √(1−Δ) acts as the identity on constants.
        assert_relative_eq!(f.h1_norm().unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn h1_of_plane_wave_picks_up_the_symbol() {
        let g = TorusGrid::new(8).unwrap();
        let f = Field2D::from_fn(g, |x1, _| (c(0.0, 1.0) * x1).exp() / (2.0 * PI));
        assert_relative_eq!(f.l2_norm(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(f.h1_norm().unwrap(), 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = TorusGrid::new(4).unwrap();
        let mut f = Field2D::zeros(g);
        f.values_mut()[3] = c(f64::NAN, 0.0);
        assert!(matches!(f.coeffs(), Err(Error::NonFiniteSamples(_))));
    }

    #[test]
    fn transverse_modes_are_orthogonal() {
        let slab = SlabGrid::new(8, 10).unwrap();
        let u = Field2D::from_fn(slab.torus().clone(), |x, y| c((x).cos() + 0.3, y.sin()))
            .normalized()
            .unwrap();
        let f1 = Field3D::from_transverse_mode(&u, slab.clone(), 1).unwrap();
        let f2 = Field3D::from_transverse_mode(&u, slab.clone(), 2).unwrap();
        assert_relative_eq!(f1.l2_norm(), 1.0, max_relative = 1e-12);
        let ip = f1.inner_product(&f2).unwrap();
        assert!(ip.norm() < 1e-12);
        // ⟨f, f⟩ = ‖f‖².
        let self_ip = f1.inner_product(&f1).unwrap();
        assert_relative_eq!(self_ip.re, 1.0, max_relative = 1e-12);
        assert!(self_ip.im.abs() < 1e-14);
    }

    #[test]
    fn slab_round_trip_and_parseval() {
        let slab = SlabGrid::new(8, 7).unwrap();
        let f = Field3D::from_fn(slab.clone(), |x, y, z| {
            c(
                (x + 0.5 * y).sin() * (z.cos()),
                (2.0 * y).cos() * ((z + 0.2).sin() - z.sin()),
            )
        });
        let coeffs = f.coeffs().unwrap();
        let back = Field3D::from_coeffs(slab, &coeffs).unwrap();
        let mut max_err: f64 = 0.0;
        for (a, b) in f.values().iter().zip(back.values()) {
            max_err = max_err.max((a - b).norm());
        }
        // z data is not band-limited in the sine basis, but the discrete
        // transform pair is still exactly inverse on the nodes.
        assert!(max_err < 1e-12, "round trip error {max_err}");
        let l2_coeff: f64 = coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(f.l2_norm(), l2_coeff, max_relative = 1e-12);
    }

    #[test]
    fn factorized_coefficients_fill_one_z_block() {
        let slab = SlabGrid::new(4, 5).unwrap();
        let u = Field2D::from_fn(slab.torus().clone(), |x, _| c(x.cos(), 0.0));
        let f = Field3D::from_transverse_mode(&u, slab.clone(), 2).unwrap();
        let coeffs = f.coeffs().unwrap();
        let plane = slab.torus().len();
        for (m_idx, block) in coeffs.chunks_exact(plane).enumerate() {
            let mass: f64 = block.iter().map(|v| v.norm_sqr()).sum();
            if m_idx == 1 {
                assert!(mass > 0.1);
            } else {
                assert!(mass < 1e-24, "z block {m_idx} leaked {mass}");
            }
        }
    }

    #[test]
    fn mixed_norm_factorizes_for_separable_fields() {
        let slab = SlabGrid::new(16, 9).unwrap();
        // f = u(x₁)u(x₂)·v(z) with v ≥ 0 peaking at the node closest to 0.
        let u = |t: f64| 1.5 + t.cos();
        let v = |z: f64| (1.0 + z.cos()).powi(2);
        let f = Field3D::from_fn(slab.clone(), |x, y, z| c(u(x) * u(y) * v(z), 0.0));
        let wx = slab.torus().weight();
        let n = slab.torus().n();
        let mut sum_u2 = 0.0;
        for j1 in 0..n {
            for j2 in 0..n {
                sum_u2 += u(slab.torus().point(j1)) * u(slab.torus().point(j2));
            }
        }
        let max_v = (0..slab.nz())
            .map(|j| v(slab.z_point(j)))
            .fold(0.0, f64::max);
        assert_relative_eq!(
            f.mixed_norm_sup_l1(),
            wx * sum_u2 * max_v,
            max_relative = 1e-12
        );
    }
}
