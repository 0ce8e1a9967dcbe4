//! Admissible two-body potentials: smooth, even, nonpositive bumps with
//! compact support strictly inside the slab, their scaled families, mixed
//! norms and the effective 2D coupling constant g₀.
//!
//! The mother potential V is scaled along the confinement ladder as
//!
//! ```text
//! V_{N,L}(x, z)  = s³ V(s·x, s·z),      s = (N/L)^β        (lab frame)
//! Ṽ_{N,L}(x, z̃) = L s³ V(s·x, L·s·z̃)                      (rescaled frame)
//! ```
//!
//! with periodic extension in x. The scale parameter c = L·s = L(N/L)^β
//! stays ≤ 1; the rescaled family then satisfies ‖Ṽ_{N,L}‖_{L∞_z L¹_x} =
//! c·‖V‖_{L∞_z L¹_x} ≤ ‖V‖_{L∞_z L¹_x}, which is the smallness budget all
//! focusing estimates run on.

use crate::quad::{clean_edges, gauss_legendre, integrate_edges, integrate_with_rule, subdivide_edges, Refinement};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// C^∞ bump profile b(s) = exp(1 − 1/(1−s²)) for |s| < 1, zero outside.
/// Even, nonnegative, b(0) = 1, all derivatives vanish at |s| = 1.
pub fn bump(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// ∫_{−1}^{1} b(s) ds, memoized to machine precision.
pub fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let (xs, ws) = gauss_legendre(24);
        integrate_with_rule(&bump, -1.0, 1.0, 16, &xs, &ws)
    })
}

/// ∫_{ℝ²} b(|u|) du = 2π ∫₀¹ b(r) r dr, memoized.
pub fn bump_radial_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let (xs, ws) = gauss_legendre(24);
        2.0 * PI * integrate_with_rule(&|r: f64| bump(r) * r, 0.0, 1.0, 16, &xs, &ws)
    })
}

/// Shape family of the mother potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// V(x, z) = A·b(x₁/rx)·b(x₂/rx)·b(z/rz): a product of three 1D bumps.
    Separable,
    /// V(x, z) = A·b(√(|x|²/rx² + z²/rz²)): one ellipsoidal bump.
    Radial,
}

/// Coordinate frame of a scaled potential: the lab slab T²×(−Lπ/2, Lπ/2) or
/// the rescaled slab T²×(−π/2, π/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rescaled,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Rescaled => "rescaled",
        }
    }
}

/// An interaction potential from a closed-form smooth bump family.
///
/// Admissibility (even, nonpositive, compactly supported strictly inside the
/// slab, smooth) is certifiable because the family is closed-form; arbitrary
/// sampled potentials are deliberately not representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: BumpKind,
    /// Depth A ≤ 0 (attractive / focusing sign).
    pub amplitude: f64,
    /// Support radius in each x direction; must stay strictly below π.
    pub rx: f64,
    /// Support radius in z; must stay strictly below π/2.
    pub rz: f64,
}

impl PotentialSpec {
    pub fn separable(amplitude: f64, rx: f64, rz: f64) -> Result<Self> {
        let spec = PotentialSpec {
            kind: BumpKind::Separable,
            amplitude,
            rx,
            rz,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn radial(amplitude: f64, rx: f64, rz: f64) -> Result<Self> {
        let spec = PotentialSpec {
            kind: BumpKind::Radial,
            amplitude,
            rx,
            rz,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The zero potential (admissible; every interaction quantity vanishes).
    pub fn zero() -> Self {
        PotentialSpec {
            kind: BumpKind::Separable,
            amplitude: 0.0,
            rx: PI / 2.0,
            rz: PI / 4.0,
        }
    }

    /// Reference separable bump: amplitude −1, x-radius π/2, z-radius π/4.
    pub fn reference() -> Self {
        PotentialSpec {
            kind: BumpKind::Separable,
            amplitude: -1.0,
            rx: PI / 2.0,
            rz: PI / 4.0,
        }
    }

    /// Reference-shaped separable bump whose mixed norm ‖V‖_{L∞_z L¹_x}
    /// equals `fraction` of the focusing stability budget 2/cgn⁴
    /// (so `fraction = 0.5` sits at 50% of the smallness threshold).
    pub fn reference_at_smallness(cgn: f64, fraction: f64) -> Result<Self> {
        if !(cgn > 0.0) || !(fraction > 0.0) || !cgn.is_finite() || !fraction.is_finite() {
            return Err(Error::InvalidParams(format!(
                "smallness scaling needs cgn > 0 and fraction > 0, got cgn={cgn}, fraction={fraction}"
            )));
        }
        let rx = PI / 2.0;
        let target = fraction * 2.0 / cgn.powi(4);
        let amplitude = -target / (rx * bump_mass()).powi(2);
        PotentialSpec::separable(amplitude, rx, PI / 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || self.amplitude > 0.0 {
            return Err(Error::InvalidPotential(format!(
                "amplitude must be a finite number ≤ 0, got {}",
                self.amplitude
            )));
        }
        if !(self.rx > 0.0 && self.rx < PI) {
            return Err(Error::InvalidPotential(format!(
                "x support radius must lie in (0, π), got {}",
                self.rx
            )));
        }
        if !(self.rz > 0.0 && self.rz < PI / 2.0) {
            return Err(Error::InvalidPotential(format!(
                "z support radius must lie in (0, π/2), got {}",
                self.rz
            )));
        }
        Ok(())
    }

    /// Pointwise value of the mother potential V (no scaling, no wrapping).
    pub fn eval(&self, x1: f64, x2: f64, z: f64) -> f64 {
        match self.kind {
            BumpKind::Separable => {
                self.amplitude * bump(x1 / self.rx) * bump(x2 / self.rx) * bump(z / self.rz)
            }
            BumpKind::Radial => {
                let q = (x1 * x1 + x2 * x2) / (self.rx * self.rx) + (z * z) / (self.rz * self.rz);
                self.amplitude * bump(q.sqrt())
            }
        }
    }

    /// Pointwise value of the scaled potential in the requested frame, with
    /// periodic extension in x. Errors when z lies outside the frame's slab.
    pub fn eval_scaled(
        &self,
        params: &ScaledPotentialParams,
        frame: Frame,
        x1: f64,
        x2: f64,
        z: f64,
    ) -> Result<f64> {
        self.validate()?;
        let s = params.scale_factor();
        let half_width = match frame {
            Frame::Lab => params.l() * PI / 2.0,
            Frame::Rescaled => PI / 2.0,
        };
        if z.abs() > half_width {
            return Err(Error::PointOutsideDomain {
                x: x1,
                y: x2,
                z,
                frame: frame.name(),
            });
        }
        let (prefactor, zs) = match frame {
            Frame::Lab => (s.powi(3), s * z),
            Frame::Rescaled => (params.l() * s.powi(3), params.l() * s * z),
        };
        let w1 = wrap_to_cell(x1);
        let w2 = wrap_to_cell(x2);
        let reach = self.rx / s;
        let value = if reach <= PI {
            // Scaled support fits inside one periodic cell: the wrapped
            // representative is the only image that can contribute.
            self.eval(s * w1, s * w2, zs)
        } else {
            let m_max = ((reach + PI) / (2.0 * PI)).ceil() as i64;
            let mut acc = 0.0;
            for m1 in -m_max..=m_max {
                for m2 in -m_max..=m_max {
                    acc += self.eval(
                        s * (w1 + 2.0 * PI * m1 as f64),
                        s * (w2 + 2.0 * PI * m2 as f64),
                        zs,
                    );
                }
            }
            acc
        };
        Ok(prefactor * value)
    }

    /// x-slice mass w(z) = ∫_{ℝ²} V(x, z) dx (equals the torus integral since
    /// the support stays inside one cell). Closed quadrature per family.
    pub fn x_mass_at(&self, z: f64) -> f64 {
        match self.kind {
            BumpKind::Separable => {
                self.amplitude * (self.rx * bump_mass()).powi(2) * bump(z / self.rz)
            }
            BumpKind::Radial => {
                let zeta2 = (z / self.rz).powi(2);
                if zeta2 >= 1.0 {
                    return 0.0;
                }
                // ∫ b(√(|u|² + ζ²)) du = π ∫₀^{1−ζ²} b(√(t + ζ²)) dt.
                let (xs, ws) = gauss_legendre(24);
                let inner = integrate_with_rule(
                    &|t: f64| bump((t + zeta2).sqrt()),
                    0.0,
                    1.0 - zeta2,
                    8,
                    &xs,
                    &ws,
                );
                self.amplitude * self.rx * self.rx * PI * inner
            }
        }
    }

    /// ∫ V over the region |z| ≤ half_width (full slab integral for
    /// half_width ≥ rz), by quadrature of the x-slice mass.
    pub fn integral_truncated(&self, half_width: f64) -> f64 {
        let h = half_width.min(self.rz);
        if h <= 0.0 {
            return 0.0;
        }
        let (xs, ws) = gauss_legendre(24);
        integrate_with_rule(&|z: f64| self.x_mass_at(z), -h, h, 16, &xs, &ws)
    }

    /// ∫ V over the slab (the full integral of the compactly supported bump).
    pub fn integral(&self) -> f64 {
        self.integral_truncated(self.rz)
    }

    /// Mixed norm ‖V‖_{L∞_z L¹_x} = sup_z ∫|V(x, z)| dx with a refinement
    /// ladder of tensor quadratures (level ℓ doubles the panel count).
    ///
    /// Both bump families decrease in |z|, so the sup is attained at z = 0.
    pub fn mixed_norm_inf1(&self, levels: u32) -> Refinement {
        let (xs, ws) = gauss_legendre(12);
        let mut values = Vec::with_capacity(levels.max(1) as usize);
        for level in 1..=levels.max(1) {
            let panels = 1usize << level;
            let f = |x1: f64, x2: f64| self.eval(x1, x2, 0.0).abs();
            let outer = integrate_with_rule(
                &|x1: f64| integrate_with_rule(&|x2| f(x1, x2), -self.rx, self.rx, panels, &xs, &ws),
                -self.rx,
                self.rx,
                panels,
                &xs,
                &ws,
            );
            values.push(outer);
        }
        Refinement::from_values(values)
    }

    /// Mixed norm of the scaled family in the given frame, by direct
    /// quadrature of the scaled potential over its own support (the sup over
    /// z is again at z = 0, which both frames contain).
    pub fn mixed_norm_inf1_scaled(
        &self,
        params: &ScaledPotentialParams,
        frame: Frame,
        panels: usize,
    ) -> Result<f64> {
        self.validate()?;
        let s = params.scale_factor();
        let reach = (self.rx / s).min(PI);
        let (xs, ws) = gauss_legendre(12);
        let f = |x1: f64, x2: f64| -> f64 {
            self.eval_scaled(params, frame, x1, x2, 0.0)
                .expect("z = 0 is inside every frame")
                .abs()
        };
        Ok(integrate_with_rule(
            &|x1: f64| integrate_with_rule(&|x2| f(x1, x2), -reach, reach, panels, &xs, &ws),
            -reach,
            reach,
            panels,
            &xs,
            &ws,
        ))
    }
}

fn wrap_to_cell(x: f64) -> f64 {
    // Map into [−π, π).
    let w = x - (2.0 * PI) * (x / (2.0 * PI)).round();
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Scaling-ladder parameters (N, L, β) with the confinement constraint
/// c = L(N/L)^β ≤ 1. N is real-valued: it is the mean-field strength of the
/// one-body proxy, not a literal particle count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScalingParams", into = "RawScalingParams")]
pub struct ScaledPotentialParams {
    n: f64,
    l: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawScalingParams {
    n: f64,
    l: f64,
    beta: f64,
}

impl TryFrom<RawScalingParams> for ScaledPotentialParams {
    type Error = Error;
    fn try_from(raw: RawScalingParams) -> Result<Self> {
        ScaledPotentialParams::new(raw.n, raw.l, raw.beta)
    }
}

impl From<ScaledPotentialParams> for RawScalingParams {
    fn from(p: ScaledPotentialParams) -> Self {
        RawScalingParams {
            n: p.n,
            l: p.l,
            beta: p.beta,
        }
    }
}

impl ScaledPotentialParams {
    pub fn new(n: f64, l: f64, beta: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParams(format!("N must be positive, got {n}")));
        }
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::InvalidParams(format!("L must lie in (0, 1], got {l}")));
        }
        if !(beta > 0.0 && beta < 3.0 / 7.0) {
            return Err(Error::InvalidParams(format!(
                "β must lie in (0, 3/7), got {beta}"
            )));
        }
        let c = l * (n / l).powf(beta);
        if c > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "confinement parameter c = L(N/L)^β = {c} exceeds 1"
            )));
        }
        Ok(ScaledPotentialParams { n, l, beta })
    }

    /// Solve L(N/L)^β = c for N at the given rung.
    pub fn from_c(c: f64, l: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "confinement parameter c must lie in (0, 1], got {c}"
            )));
        }
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::InvalidParams(format!("L must lie in (0, 1], got {l}")));
        }
        if !(beta > 0.0 && beta < 3.0 / 7.0) {
            return Err(Error::InvalidParams(format!(
                "β must lie in (0, 3/7), got {beta}"
            )));
        }
        let n = l * (c / l).powf(1.0 / beta);
        ScaledPotentialParams::new(n, l, beta)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Confinement parameter c = L(N/L)^β.
    pub fn c(&self) -> f64 {
        self.l * self.scale_factor()
    }

    /// Concentration scale s = (N/L)^β of the potential family.
    pub fn scale_factor(&self) -> f64 {
        (self.n / self.l).powf(self.beta)
    }

    /// ε = (N/L)^{−β} = L/c, the inverse concentration scale.
    pub fn epsilon(&self) -> f64 {
        1.0 / self.scale_factor()
    }

    /// a = L/N (recorded for bookkeeping; unused by the one-body proxy).
    pub fn scattering_scale(&self) -> f64 {
        self.l / self.n
    }
}

/// Coupling constant of the effective 2D equation:
/// g₀ = (4/π²) ∬ w(z₁−z₂) cos²z₁ cos²z₂ dz₁ dz₂ with w(z) = ∫_{T²} V(x, z) dx,
/// both z-integrals over (−π/2, π/2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingEstimate {
    /// Finest-level value.
    pub value: f64,
    /// Values and successive-difference error estimates per level.
    pub levels: Refinement,
}

/// Tensor quadrature of g₀ with panel edges aligned to the support seams
/// z₁ − z₂ = ±rz (where the bump's non-analyticity sits); level ℓ uses 2^{ℓ−1}
/// sub-panels per seam-aligned interval.
pub fn coupling_constant_g0(spec: &PotentialSpec, quad_level: u32) -> Result<CouplingEstimate> {
    spec.validate()?;
    if quad_level == 0 {
        return Err(Error::InvalidConfig(
            "coupling quadrature needs at least one level".into(),
        ));
    }
    let (xs, ws) = gauss_legendre(10);
    let mut values = Vec::with_capacity(quad_level as usize);
    for level in 1..=quad_level {
        values.push(g0_at_level(spec, level, &xs, &ws));
    }
    let levels = Refinement::from_values(values);
    Ok(CouplingEstimate {
        value: levels.value(),
        levels,
    })
}

fn g0_at_level(spec: &PotentialSpec, level: u32, xs: &[f64], ws: &[f64]) -> f64 {
    let rz = spec.rz;
    let half = PI / 2.0;
    let sub = 1usize << (level - 1);
    let outer_edges = subdivide_edges(&clean_edges(&[-(half - rz), half - rz], -half, half), sub);
    let inner = |z1: f64| {
        let inner_edges = subdivide_edges(&clean_edges(&[z1 - rz, z1 + rz], -half, half), sub);
        integrate_edges(
            &|z2: f64| z2.cos().powi(2) * spec.x_mass_at(z1 - z2),
            &inner_edges,
            xs,
            ws,
        )
    };
    let double = integrate_edges(&|z1: f64| z1.cos().powi(2) * inner(z1), &outer_edges, xs, ws);
    4.0 / (PI * PI) * double
}

/// Per-condition admissibility verdicts with measured margins. Failures are
/// report entries, never errors: the check accepts any field values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub even: bool,
    /// max |V(r) − V(−r)| over a sample grid.
    pub even_margin: f64,
    pub nonpositive: bool,
    /// max V over the sample grid (must be ≤ 0).
    pub max_value: f64,
    pub compact_support: bool,
    /// min distance of the declared radii to the slab boundary.
    pub support_clearance: f64,
    pub smooth: bool,
    /// Acceleration of the spectral tail decay of a 1D diagnostic profile:
    /// with tail(n) the largest coefficient in the window n/4 < |k| ≤ n/2,
    /// this is [tail(256)/tail(128)] / [tail(128)/tail(64)]. Algebraic decay
    /// |c_k| ~ k^{−p} keeps the window ratio constant (quotient ≈ 1);
    /// super-algebraic decay makes it shrink (quotient well below 1).
    pub smooth_decay_ratio: f64,
    pub smallness: bool,
    /// Quadrature value of ‖V‖_{L∞_z L¹_x}.
    pub mixed_norm: f64,
    /// 2α/cgn⁴, the focusing stability budget.
    pub smallness_threshold: f64,
    /// threshold − mixed_norm (≥ 0 required).
    pub smallness_margin: f64,
    pub passed: bool,
}

/// Checks the interaction hypotheses (even, nonpositive, compactly supported,
/// smooth) plus the smallness condition ‖V‖_{L∞_z L¹_x} ≤ 2α/cgn⁴.
pub fn admissibility_check(spec: &PotentialSpec, cgn: f64, alpha: f64) -> Result<AdmissibilityReport> {
    if !(cgn > 0.0) || !cgn.is_finite() {
        return Err(Error::InvalidParams(format!("cgn must be positive, got {cgn}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!(
            "α must lie in (0, 1), got {alpha}"
        )));
    }

    // Evenness and sign on a sample grid covering the declared support.
    let mut even_margin: f64 = 0.0;
    let mut max_value = f64::NEG_INFINITY;
    let steps = 9;
    for i in 0..steps {
        let x1 = -spec.rx + 2.0 * spec.rx * i as f64 / (steps - 1) as f64;
        for j in 0..steps {
            let x2 = -spec.rx + 2.0 * spec.rx * j as f64 / (steps - 1) as f64;
            for k in 0..steps {
                let z = -spec.rz + 2.0 * spec.rz * k as f64 / (steps - 1) as f64;
                let v = spec.eval(x1, x2, z);
                even_margin = even_margin.max((v - spec.eval(-x1, -x2, -z)).abs());
                max_value = max_value.max(v);
            }
        }
    }
    let even = even_margin <= 1e-12;
    let nonpositive = max_value <= 1e-12;

    // Compact support: declared radii strictly inside the slab, and sampled
    // values just outside the support identically zero.
    let support_clearance = (PI - spec.rx).min(PI / 2.0 - spec.rz).min(spec.rx).min(spec.rz);
    let mut outside_zero = true;
    for factor in [1.000001, 1.01, 1.25] {
        let x_out = (spec.rx * factor).min(0.999 * PI);
        let z_out = (spec.rz * factor).min(0.999 * PI / 2.0);
        if x_out > spec.rx && spec.eval(x_out, 0.0, 0.0) != 0.0 {
            outside_zero = false;
        }
        if x_out > spec.rx && spec.eval(0.0, x_out, 0.0) != 0.0 {
            outside_zero = false;
        }
        if z_out > spec.rz && spec.eval(0.0, 0.0, z_out) != 0.0 {
            outside_zero = false;
        }
    }
    let compact_support = support_clearance > 0.0 && outside_zero;

    // Smoothness proxy: spectral tail decay of the 1D x-profile must
    // accelerate under window doubling (measured quotient ≈ 0.42–0.73 for the
    // bump families vs ≈ 0.92–0.99 for C⁰/C² comparison profiles).
    let smooth_decay_ratio = spectral_tail_ratio(spec);
    let smooth = smooth_decay_ratio <= 0.85;

    let mixed_norm = spec.mixed_norm_inf1(4).value();
    let smallness_threshold = 2.0 * alpha / cgn.powi(4);
    let smallness_margin = smallness_threshold - mixed_norm;
    let smallness = smallness_margin >= -1e-12;

    let passed = even && nonpositive && compact_support && smooth && smallness;
    Ok(AdmissibilityReport {
        even,
        even_margin,
        nonpositive,
        max_value,
        compact_support,
        support_clearance,
        smooth,
        smooth_decay_ratio,
        smallness,
        mixed_norm,
        smallness_threshold,
        smallness_margin,
        passed,
    })
}

/// Decay-acceleration quotient of the spectral tails of the diagnostic
/// profile x ↦ V(x, 0, 0), with tail(n) = max_{n/4 < |k| ≤ n/2} |c_k| on an
/// n-point periodic grid: [tail(256)/tail(128)] / [tail(128)/tail(64)].
fn spectral_tail_ratio(spec: &PotentialSpec) -> f64 {
    let tail = |n: usize| -> f64 {
        let mut max_tail: f64 = 0.0;
        for k in (n / 4 + 1)..=(n / 2) {
            // Real even profile: c_k = (1/n) Σ_j f(x_j) cos(k x_j).
            let mut re = 0.0;
            for j in 0..n {
                let x = -PI + 2.0 * PI * j as f64 / n as f64;
                re += spec.eval(x, 0.0, 0.0) * (k as f64 * x).cos();
            }
            max_tail = max_tail.max((re / n as f64).abs());
        }
        max_tail
    };
    let t64 = tail(64);
    let t128 = tail(128);
    let t256 = tail(256);
    // Tails already at roundoff: nothing left to measure, decay is as fast
    // as representable.
    if t64 < 1e-300 || t128 < 1e-14 * spec.amplitude.abs() {
        return 0.0;
    }
    (t256 / t128) / (t128 / t64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_profile_basics() {
        assert_relative_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.2), 0.0);
        assert_relative_eq!(bump(0.3), bump(-0.3));
        assert!(bump_mass() > 1.0 && bump_mass() < 2.0);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(PotentialSpec::separable(1.0, 1.0, 0.5).is_err()); // repulsive
        assert!(PotentialSpec::separable(-1.0, PI, 0.5).is_err()); // touches x boundary
        assert!(PotentialSpec::separable(-1.0, 1.0, PI / 2.0).is_err()); // touches z boundary
        assert!(PotentialSpec::separable(-1.0, 0.0, 0.5).is_err()); // empty support
        assert!(PotentialSpec::separable(-1.0, 1.0, 0.5).is_ok());
        assert!(PotentialSpec::separable(0.0, 1.0, 0.5).is_ok()); // zero depth allowed
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let spec = PotentialSpec::radial(-1.2345678901234567e-1, 0.7853981633974483, 0.5).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: PotentialSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec.amplitude.to_bits(), back.amplitude.to_bits());
        assert_eq!(spec.rx.to_bits(), back.rx.to_bits());
        assert_eq!(spec.rz.to_bits(), back.rz.to_bits());
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn unknown_json_keys_are_rejected() {
        let text = r#"{"kind":"separable","amplitude":-1.0,"rx":1.0,"rz":0.5,"extra":3}"#;
        assert!(serde_json::from_str::<PotentialSpec>(text).is_err());
    }

    #[test]
    fn scaled_value_at_origin() {
        let spec = PotentialSpec::reference();
        let params = ScaledPotentialParams::from_c(0.9, 0.5, 0.25).unwrap();
        let s = params.scale_factor();
        let lab = spec.eval_scaled(&params, Frame::Lab, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(lab, s.powi(3) * spec.amplitude, max_relative = 1e-13);
        let resc = spec
            .eval_scaled(&params, Frame::Rescaled, 0.0, 0.0, 0.0)
            .unwrap();
        assert_relative_eq!(resc, params.l() * s.powi(3) * spec.amplitude, max_relative = 1e-13);
    }

    #[test]
    fn zero_spec_is_identically_zero() {
        let spec = PotentialSpec::zero();
        let params = ScaledPotentialParams::from_c(0.9, 0.5, 0.25).unwrap();
        for (x, z) in [(0.0, 0.0), (1.0, 0.2), (-2.0, -0.7)] {
            assert_eq!(spec.eval_scaled(&params, Frame::Rescaled, x, 0.3, z).unwrap(), 0.0);
        }
        assert_eq!(coupling_constant_g0(&spec, 3).unwrap().value, 0.0);
    }

    #[test]
    fn lab_frame_rejects_points_outside_thin_slab() {
        let spec = PotentialSpec::reference();
        let params = ScaledPotentialParams::from_c(0.9, 0.25, 0.25).unwrap();
        // |z| beyond Lπ/2 is outside the lab slab but inside the rescaled one.
        let z = 0.3 * PI;
        assert!(matches!(
            spec.eval_scaled(&params, Frame::Lab, 0.0, 0.0, z),
            Err(Error::PointOutsideDomain { frame: "lab", .. })
        ));
        assert!(spec.eval_scaled(&params, Frame::Rescaled, 0.0, 0.0, z).is_ok());
    }

    #[test]
    fn periodic_extension_wraps_in_x() {
        let spec = PotentialSpec::reference();
        let params = ScaledPotentialParams::from_c(0.9, 0.5, 0.25).unwrap();
        let a = spec
            .eval_scaled(&params, Frame::Rescaled, 0.1, -0.2, 0.05)
            .unwrap();
        let b = spec
            .eval_scaled(&params, Frame::Rescaled, 0.1 + 2.0 * PI, -0.2 - 4.0 * PI, 0.05)
            .unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-13);
    }

    #[test]
    fn mixed_norm_matches_separable_factorization() {
        let spec = PotentialSpec::separable(-2.0, 1.1, 0.4).unwrap();
        let closed = 2.0 * (1.1 * bump_mass()).powi(2);
        let refinement = spec.mixed_norm_inf1(4);
        assert_relative_eq!(refinement.value(), closed, max_relative = 1e-10);
        // Error estimates must shrink on this smooth profile.
        let est = &refinement.error_estimates;
        assert!(est.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn scaling_params_validate_the_ladder_constraint() {
        assert!(ScaledPotentialParams::new(5.2488, 0.5, 0.25).is_ok());
        // c > 1: N too large for this rung.
        assert!(ScaledPotentialParams::new(50.0, 0.5, 0.25).is_err());
        assert!(ScaledPotentialParams::new(1.0, 1.5, 0.25).is_err());
        assert!(ScaledPotentialParams::new(1.0, 0.5, 0.5).is_err());
        let p = ScaledPotentialParams::from_c(0.9, 0.5, 0.25).unwrap();
        assert_relative_eq!(p.n(), 0.5 * 1.8f64.powi(4), max_relative = 1e-12);
        assert_relative_eq!(p.c(), 0.9, max_relative = 1e-12);
        assert_relative_eq!(p.epsilon() * p.scale_factor(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.scattering_scale(), p.l() / p.n(), max_relative = 1e-14);
    }

    #[test]
    fn g0_is_negative_and_refines_for_the_reference_bump() {
        let est = coupling_constant_g0(&PotentialSpec::reference(), 4).unwrap();
        assert!(est.value < 0.0, "g0 = {}", est.value);
        assert_eq!(est.levels.values.len(), 4);
        assert_eq!(est.levels.error_estimates.len(), 3);
    }

    #[test]
    fn g0_invariant_under_potential_kind_symmetry() {
        // The x-mass of the radial kind is even in z, so g0 < 0 there too.
        let est = coupling_constant_g0(&PotentialSpec::radial(-1.0, 1.0, 0.5).unwrap(), 3).unwrap();
        assert!(est.value < 0.0);
    }

    #[test]
    fn admissibility_zero_potential_passes() {
        let report = admissibility_check(&PotentialSpec::zero(), 0.6, 0.5).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.even_margin, 0.0);
        assert!(report.smallness_margin > 0.0);
    }

    #[test]
    fn admissibility_flags_only_smallness_for_a_deep_bump() {
        let cgn = 0.6;
        let deep = PotentialSpec::separable(-1e3, PI / 2.0, PI / 4.0).unwrap();
        let report = admissibility_check(&deep, cgn, 0.5).unwrap();
        assert!(report.even && report.nonpositive && report.compact_support && report.smooth);
        assert!(!report.smallness && !report.passed);
        assert!(report.smallness_margin < 0.0);
    }

    #[test]
    fn admissibility_at_exact_threshold_has_zero_margin() {
        let cgn = 0.6f64;
        let alpha = 0.5;
        let threshold = 2.0 * alpha / cgn.powi(4);
        // Solve for the amplitude whose *quadrature* mixed norm hits the
        // threshold exactly, then verify the margin vanishes.
        let unit = PotentialSpec::separable(-1.0, PI / 2.0, PI / 4.0).unwrap();
        let unit_norm = unit.mixed_norm_inf1(4).value();
        let spec = PotentialSpec::separable(-threshold / unit_norm, PI / 2.0, PI / 4.0).unwrap();
        let report = admissibility_check(&spec, cgn, alpha).unwrap();
        assert!(report.smallness_margin.abs() < 1e-9, "{}", report.smallness_margin);
        assert!(report.smallness);
    }

    #[test]
    fn smallness_fraction_constructor_hits_the_requested_budget() {
        let cgn = 0.59;
        let spec = PotentialSpec::reference_at_smallness(cgn, 0.5).unwrap();
        let norm = spec.mixed_norm_inf1(4).value();
        assert_relative_eq!(norm, 1.0 / cgn.powi(4), max_relative = 1e-9);
    }
}
