//! Fourier multipliers: operators diagonal in the orthonormal mode basis.
//!
//! A multiplier is described by a real symbol s(k₁, k₂, m) on the mode
//! indices, with m the Dirichlet index in z. By convention m = 0 means the
//! multiplier is being applied to a purely 2D field (x-only symbols ignore m
//! altogether). Real symbols give self-adjoint operators; nonnegative symbols
//! give positive semidefinite quadratic forms.

use crate::field::{Field2D, Field3D};
use crate::{Error, Result};
use std::sync::Arc;

type Symbol = dyn Fn(i64, i64, usize) -> f64 + Send + Sync;

/// Operator acting coefficient-wise as c(k, m) ↦ s(k, m)·c(k, m).
#[derive(Clone)]
pub struct FourierMultiplier {
    name: String,
    symbol: Arc<Symbol>,
}

impl std::fmt::Debug for FourierMultiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierMultiplier")
            .field("name", &self.name)
            .finish()
    }
}

impl FourierMultiplier {
    pub fn new(
        name: impl Into<String>,
        symbol: impl Fn(i64, i64, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FourierMultiplier {
            name: name.into(),
            symbol: Arc::new(symbol),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |_, _, _| 1.0)
    }

    /// Symbol |k|² of −Δ_x (acts in the x directions only).
    pub fn x_laplacian() -> Self {
        Self::new("-laplacian_x", |k1, k2, _| (k1 * k1 + k2 * k2) as f64)
    }

    /// Symbol (1 + |k|²)^s of the inhomogeneous x-Sobolev operator (1−Δ_x)^s.
    pub fn x_sobolev(s: f64) -> Self {
        Self::new(format!("(1-laplacian_x)^{s}"), move |k1, k2, _| {
            (1.0 + (k1 * k1 + k2 * k2) as f64).powf(s)
        })
    }

    /// Slab kinetic symbol for the evolution generator on the rescaled slab:
    /// |k|² + (m² − 1)/L² when `renormalized` (the transverse ground energy
    /// 1/L² is subtracted), |k|² + m²/L² otherwise.
    pub fn slab_kinetic(l: f64, renormalized: bool) -> Self {
        let inv_l2 = 1.0 / (l * l);
        let shift = if renormalized { -1.0 } else { 0.0 };
        let tag = if renormalized { "renormalized" } else { "lab" };
        Self::new(format!("slab_kinetic[{tag}, L={l}]"), move |k1, k2, m| {
            (k1 * k1 + k2 * k2) as f64 + (m as f64 * m as f64 + shift) * inv_l2
        })
    }

    /// Renormalized slab energy symbol 1 + |k|² + (m² − 1)/L², the quadratic
    /// form of 1 − Δ_x − ∂_z²/L² − 1/L² on the Dirichlet basis. Nonnegative
    /// for every retained mode (m ≥ 1).
    pub fn slab_h1(l: f64) -> Self {
        let inv_l2 = 1.0 / (l * l);
        Self::new(format!("slab_h1[L={l}]"), move |k1, k2, m| {
            1.0 + (k1 * k1 + k2 * k2) as f64 + (m as f64 * m as f64 - 1.0) * inv_l2
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbol(&self, k1: i64, k2: i64, m: usize) -> f64 {
        (self.symbol)(k1, k2, m)
    }

    fn checked_symbol(&self, k1: i64, k2: i64, m: usize) -> Result<f64> {
        let s = self.symbol(k1, k2, m);
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::NonFiniteSymbol { k1, k2, m })
        }
    }

    /// Apply to a 2D field (the z index is passed as 0).
    pub fn apply_2d(&self, f: &Field2D) -> Result<Field2D> {
        let mut coeffs = f.coeffs()?;
        let g = f.grid();
        let n = g.n();
        for b1 in 0..n {
            for b2 in 0..n {
                let s = self.checked_symbol(g.mode(b1), g.mode(b2), 0)?;
                coeffs[b1 * n + b2] *= s;
            }
        }
        Field2D::from_coeffs(g.clone(), &coeffs)
    }

    /// Apply to a slab field; m runs over the Dirichlet indices 1..=nz.
    pub fn apply_3d(&self, f: &Field3D) -> Result<Field3D> {
        let mut coeffs = f.coeffs()?;
        let g = f.grid();
        let n = g.nx();
        let plane = n * n;
        for m in 1..=g.nz() {
            let block = &mut coeffs[(m - 1) * plane..m * plane];
            for b1 in 0..n {
                for b2 in 0..n {
                    let s = self.checked_symbol(g.torus().mode(b1), g.torus().mode(b2), m)?;
                    block[b1 * n + b2] *= s;
                }
            }
        }
        Field3D::from_coeffs(g.clone(), &coeffs)
    }

    /// ⟨Mf, f⟩ = Σ s(k)|c_k|² for a 2D field; real by construction.
    pub fn quadratic_form_2d(&self, f: &Field2D) -> Result<f64> {
        let coeffs = f.coeffs()?;
        let g = f.grid();
        let n = g.n();
        let mut acc = 0.0;
        for b1 in 0..n {
            for b2 in 0..n {
                let s = self.checked_symbol(g.mode(b1), g.mode(b2), 0)?;
                acc += s * coeffs[b1 * n + b2].norm_sqr();
            }
        }
        Ok(acc)
    }

    /// ⟨Mf, f⟩ = Σ s(k, m)|C(k, m)|² for a slab field.
    pub fn quadratic_form_3d(&self, f: &Field3D) -> Result<f64> {
        let coeffs = f.coeffs()?;
        let g = f.grid();
        let n = g.nx();
        let plane = n * n;
        let mut acc = 0.0;
        for m in 1..=g.nz() {
            let block = &coeffs[(m - 1) * plane..m * plane];
            for b1 in 0..n {
                for b2 in 0..n {
                    let s = self.checked_symbol(g.torus().mode(b1), g.torus().mode(b2), m)?;
                    acc += s * block[b1 * n + b2].norm_sqr();
                }
            }
        }
        Ok(acc)
    }
}
