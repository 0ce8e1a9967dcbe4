//! Discrete grids: the periodic square T² = (−π, π)² and the slab
//! T² × (−π/2, π/2) with a Dirichlet z-direction.
//!
//! Torus samples sit at x_j = −π + 2πj/n with uniform quadrature weight
//! (2π/n)²; this rule is exact for trigonometric polynomials below the
//! Nyquist mode. The z-direction uses the interior sine nodes
//! z_j = −π/2 + jπ/(nz+1), j = 1..nz, with weight π/(nz+1); the discrete
//! sine orthogonality Σ_j sin(m w_j) sin(m' w_j) = (nz+1)/2 δ_{mm'} makes the
//! basis e_m(z) = √(2/π) sin(m(z+π/2)) exactly orthonormal under this rule.

use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform grid on the periodic square (−π, π)².
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    /// `n` samples per direction; must be even and at least 4 so that the
    /// mode layout −n/2 .. n/2−1 is symmetric around zero.
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "torus grid size must be even and >= 4, got {n}"
            )));
        }
        Ok(TorusGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of sample points (and retained modes).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample coordinate along one axis.
    pub fn point(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.n as f64
    }

    /// Quadrature weight per sample; the weights sum to (2π)² exactly.
    pub fn weight(&self) -> f64 {
        let h = 2.0 * PI / self.n as f64;
        h * h
    }

    /// Integer mode for FFT bin `i`: 0..n/2−1 ↦ 0..n/2−1, n/2..n−1 ↦ −n/2..−1.
    pub fn mode(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// FFT bin holding integer mode `k` (any representative modulo n).
    pub fn bin(&self, k: i64) -> usize {
        (k.rem_euclid(self.n as i64)) as usize
    }

    /// Largest mode kept by the 2/3 de-aliasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }
}

/// Slab grid: a [`TorusGrid`] in x and `nz` interior sine nodes in z.
#[derive(Debug, Clone)]
pub struct SlabGrid {
    torus: TorusGrid,
    nz: usize,
    /// sine_table[(m−1)*nz + (j−1)] = sin(m j π/(nz+1)).
    sine_table: Arc<Vec<f64>>,
}

/// Serialized form of [`SlabGrid`]: just the grid dimensions; the sine table
/// is rebuilt on load.
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SlabGridRepr {
    nx: usize,
    nz: usize,
}

impl serde::Serialize for SlabGrid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SlabGridRepr {
            nx: self.nx(),
            nz: self.nz,
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for SlabGrid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SlabGridRepr::deserialize(deserializer)?;
        SlabGrid::new(repr.nx, repr.nz).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for SlabGrid {
    fn eq(&self, other: &Self) -> bool {
        self.torus == other.torus && self.nz == other.nz
    }
}

impl SlabGrid {
    pub fn new(nx: usize, nz: usize) -> Result<Self> {
        let torus = TorusGrid::new(nx)?;
        if nz < 2 {
            return Err(Error::InvalidGrid(format!(
                "slab grid needs at least 2 z modes, got {nz}"
            )));
        }
        let mut sine_table = vec![0.0; nz * nz];
        for m in 1..=nz {
            for j in 1..=nz {
                sine_table[(m - 1) * nz + (j - 1)] =
                    (m as f64 * j as f64 * PI / (nz as f64 + 1.0)).sin();
            }
        }
        Ok(SlabGrid {
            torus,
            nz,
            sine_table: Arc::new(sine_table),
        })
    }

    pub fn torus(&self) -> &TorusGrid {
        &self.torus
    }

    pub fn nx(&self) -> usize {
        self.torus.n()
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn len(&self) -> usize {
        self.torus.len() * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// z spacing π/(nz+1), also the z quadrature weight.
    pub fn dz(&self) -> f64 {
        PI / (self.nz as f64 + 1.0)
    }

    /// Interior z node, `j` in 0..nz.
    pub fn z_point(&self, j: usize) -> f64 {
        -PI / 2.0 + (j as f64 + 1.0) * self.dz()
    }

    /// Combined 3D quadrature weight per sample.
    pub fn weight(&self) -> f64 {
        self.torus.weight() * self.dz()
    }

    /// sin(m (z_j + π/2)) for mode m in 1..=nz and node index j in 0..nz.
    pub fn sine(&self, m: usize, j: usize) -> f64 {
        debug_assert!((1..=self.nz).contains(&m) && j < self.nz);
        self.sine_table[(m - 1) * self.nz + j]
    }

    /// Orthonormal transverse basis value e_m(z_j) = √(2/π) sin(m (z_j + π/2)).
    pub fn basis_z(&self, m: usize, j: usize) -> f64 {
        (2.0 / PI).sqrt() * self.sine(m, j)
    }

    /// Forward sine transform along z of one lane: values at the nz interior
    /// nodes to orthonormal coefficients for m = 1..nz.
    pub fn z_forward(&self, lane: &[f64], out: &mut [f64]) {
        let scale = (2.0 / PI).sqrt() * self.dz();
        for m in 1..=self.nz {
            let row = &self.sine_table[(m - 1) * self.nz..m * self.nz];
            let mut acc = 0.0;
            for (s, v) in row.iter().zip(lane) {
                acc += s * v;
            }
            out[m - 1] = scale * acc;
        }
    }

    /// Inverse sine transform: orthonormal coefficients to node values.
    pub fn z_inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        let scale = (2.0 / PI).sqrt();
        out.fill(0.0);
        for m in 1..=self.nz {
            let c = scale * coeffs[m - 1];
            if c == 0.0 {
                continue;
            }
            let row = &self.sine_table[(m - 1) * self.nz..m * self.nz];
            for (o, s) in out.iter_mut().zip(row) {
                *o += c * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_rejects_odd_and_tiny() {
        assert!(TorusGrid::new(3).is_err());
        assert!(TorusGrid::new(7).is_err());
        assert!(TorusGrid::new(2).is_err());
        assert!(TorusGrid::new(4).is_ok());
    }

    #[test]
    fn torus_weights_sum_to_full_area() {
        for n in [4, 8, 10, 32] {
            let g = TorusGrid::new(n).unwrap();
            let total = g.weight() * g.len() as f64;
            assert!(
                (total - 4.0 * PI * PI).abs() < 1e-12,
                "n={n}: area {total}"
            );
        }
    }

    #[test]
    fn torus_mode_layout_round_trips() {
        let g = TorusGrid::new(8).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| g.mode(i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for i in 0..8 {
            assert_eq!(g.bin(g.mode(i)), i);
        }
    }

    #[test]
    fn slab_z_basis_is_orthonormal() {
        let g = SlabGrid::new(4, 9).unwrap();
        for m in 1..=9 {
            for mp in 1..=9 {
                let mut acc = 0.0;
                for j in 0..9 {
                    acc += g.dz() * g.basis_z(m, j) * g.basis_z(mp, j);
                }
                let expect = if m == mp { 1.0 } else { 0.0 };
                assert!(
                    (acc - expect).abs() < 1e-12,
                    "m={m} m'={mp}: {acc}"
                );
            }
        }
    }

    #[test]
    fn slab_z_transform_round_trips_and_preserves_mass() {
        let g = SlabGrid::new(4, 13).unwrap();
        let lane: Vec<f64> = (0..13).map(|j| (j as f64 * 0.7).sin() + 0.3).collect();
        let mut coeffs = vec![0.0; 13];
        let mut back = vec![0.0; 13];
        g.z_forward(&lane, &mut coeffs);
        g.z_inverse(&coeffs, &mut back);
        for (a, b) in lane.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let mass_quad: f64 = lane.iter().map(|v| g.dz() * v * v).sum();
        let mass_coeff: f64 = coeffs.iter().map(|c| c * c).sum();
        assert!((mass_quad - mass_coeff).abs() < 1e-12);
    }

    #[test]
    fn first_transverse_mode_is_cosine() {
        // e_1(z) = √(2/π) cos z on (−π/2, π/2).
        let g = SlabGrid::new(4, 16).unwrap();
        for j in 0..16 {
            let z = g.z_point(j);
            let expect = (2.0 / PI).sqrt() * z.cos();
            assert!((g.basis_z(1, j) - expect).abs() < 1e-13);
        }
    }
}
