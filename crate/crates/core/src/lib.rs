//! Numerical laboratory for the dimensional reduction of a weakly coupled
//! Bose gas confined to a thin periodic slab.
//!
//! The slab is Ω = T² × (−π/2, π/2) with periodic coordinates x ∈ T² = (−π, π)²
//! and a Dirichlet direction z. Scaled two-body potentials
//!
//! ```text
//! V_{N,L}(x, z)  = (N/L)^{3β} V((N/L)^β x, (N/L)^β z)        (lab frame)
//! Ṽ_{N,L}(x, z̃) = L (N/L)^{3β} V((N/L)^β x, L (N/L)^β z̃)    (rescaled frame)
//! ```
//!
//! concentrate as the scaling parameter c = L(N/L)^β stays ≤ 1 while L ↓ 0.
//! The crate provides:
//!
//! * spectral grids, fields and Fourier multipliers on the slab ([`grid`],
//!   [`field`], [`multiplier`]),
//! * compactly supported smooth potentials, their mixed norms and the limiting
//!   2D coupling constant g₀ ([`potential`]),
//! * a lower-bound estimator for the inhomogeneous Gagliardo–Nirenberg
//!   constant on T² ([`gn`]),
//! * Strang-split evolutions of the 2D cubic NLS and of the 3D Hartree proxy
//!   on the slab, plus an imaginary-time energy minimizer ([`dynamics`]),
//! * the confinement convergence study comparing x-reduced densities of the
//!   3D flow against the 2D flow along a scaling ladder ([`reduction`]),
//! * numerical checks of the analytic inequalities used by the reduction
//!   ([`checks`]).
//!
//! All discrete objects use orthonormal bases: e_k(x) = e^{ik·x}/(2π) on the
//! torus and e_m(z) = √(2/π) sin(m(z + π/2)) in the Dirichlet direction, so
//! coefficient ℓ² masses equal L² masses exactly on the grid.

pub mod checks;
pub mod dynamics;
pub mod field;
pub mod gn;
pub mod grid;
pub mod multiplier;
pub mod potential;
pub mod quad;
pub mod reduction;
pub mod report;
pub mod sampling;

pub use field::{Field2D, Field3D};
pub use grid::{SlabGrid, TorusGrid};

/// Errors produced by grid construction, parameter validation and the
/// numerical drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid scaling parameters: {0}")]
    InvalidParams(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("point ({x}, {y}, {z}) lies outside the slab for frame {frame}")]
    PointOutsideDomain {
        x: f64,
        y: f64,
        z: f64,
        frame: &'static str,
    },
    #[error(
        "grid too coarse along {axis} for the scaled potential (kernel width spans \
         {support_cells:.3} sample spacings); increase the {axis} sample count to at least {suggested}"
    )]
    GridTooCoarse {
        axis: &'static str,
        support_cells: f64,
        suggested: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("multiplier symbol is not finite at mode ({k1}, {k2}, {m})")]
    NonFiniteSymbol { k1: i64, k2: i64, m: usize },
    #[error("non-finite samples: {0}")]
    NonFiniteSamples(String),
    #[error("field became non-finite at step {step}")]
    NonFiniteField { step: usize },
    #[error("gradient norm grew by more than {factor:.1e} at step {step}: blow-up sentinel")]
    BlowUp { step: usize, factor: f64 },
    #[error("{context} did not converge: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    NonConvergence {
        context: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("check instance rejected: {0}")]
    InstanceRejected(String),
    #[error("conservation failure in {context}: {quantity} drifted by {drift:.3e}")]
    ConservationFailure {
        context: String,
        quantity: &'static str,
        drift: f64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
