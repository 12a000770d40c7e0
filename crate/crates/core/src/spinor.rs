//! Spinor diffraction: the first-order surface integral with the Dirac Green's
//! matrix, the spinor Kirchhoff–Fresnel and Fraunhofer formulas built on the
//! γ-factor `(1 + γ³)γ³`, and the non-relativistic reduction.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::algebra::{gamma_direction, gamma_factor, DiracSpinor, Direction3, GammaMatrix, ParticleState, SpinorWave};
use crate::error::{Error, Result};
use crate::green::{green_matrix_at, Separation};
use crate::grid::{ScalarField2D, SpinorField2D};
use crate::scalar::{aperture_nodes, check_target, fraunhofer_scalar, warn_if_near, DetectorSpec, SourceSpec, SurfaceElement};
use crate::sum::{CompensatedSum, SpinorSum};
use crate::{Vec3, C64};

/// Boundary datum for the spinor surface integral. Only the value is needed.
#[derive(Debug, Clone, Copy)]
pub struct SpinorBoundarySample {
    pub position: Vec3,
    /// Outward unit normal.
    pub normal: Direction3,
    pub weight: f64,
    pub value: DiracSpinor,
}

pub fn sample_spinor_wave(surface: &[SurfaceElement], wave: &dyn SpinorWave) -> Vec<SpinorBoundarySample> {
    surface
        .iter()
        .map(|e| SpinorBoundarySample {
            position: e.position,
            normal: e.normal,
            weight: e.weight,
            value: wave.spinor(&e.position),
        })
        .collect()
}

/// Interior spinor from boundary values alone:
///
/// ```text
/// Ψ(r') = −i Σ w · g(r_S, r') · γⁿ · Ψ(r_S)
/// ```
///
/// with `g` from [`crate::green::green_matrix`] and `γⁿ` the gamma matrix
/// along the outward normal.
pub fn spinor_surface_integral(boundary: &[SpinorBoundarySample], target: &Vec3, state: &ParticleState) -> Result<DiracSpinor> {
    check_target(boundary.iter().map(|b| (b.position, b.normal, b.weight)), target, state.k())?;
    let mut acc = SpinorSum::new();
    for b in boundary {
        let sep = Separation::between(&b.position, target)?;
        let g = green_matrix_at(&sep, state);
        let flux = gamma_direction(&b.normal).apply(&b.value);
        acc.add(&g.apply(&flux).scale(C64::new(0.0, -b.weight)));
    }
    Ok(acc.value())
}

/// `(1 + γ³)γ³ = γ³ − I`, the paraxial γ-factor.
pub fn axial_gamma_factor() -> GammaMatrix {
    gamma_factor(&Direction3::z())
}

/// Spinor Kirchhoff–Fresnel propagation:
///
/// ```text
/// Ψ(P) = −(ik/4π) Σ_Q [e^{ik(r₀+s)}/(r₀ s)] · M · Ψ(Q) · ΔX ΔY,   M = γ³ − I
/// ```
///
/// The incident factor is taken from `source` exactly as in
/// [`crate::scalar::kirchhoff_fresnel`]. No scalar obliquity is applied: it is
/// carried by `M`. Zero-spinor pixels are skipped.
pub fn spinor_kirchhoff_fresnel(
    aperture: &SpinorField2D,
    source: &SourceSpec,
    detector: &DetectorSpec,
    k: f64,
) -> Result<SpinorField2D> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("wavenumber {k} must be finite and positive")));
    }
    source.validate()?;
    let grid = *aperture.grid();
    let m = axial_gamma_factor();
    let transformed: Vec<DiracSpinor> = aperture.values().iter().map(|v| m.apply(v)).collect();
    let nodes = aperture_nodes(&grid, source, k, |i| aperture.values()[i] != DiracSpinor::zero());
    let points = detector.points(k)?;
    warn_if_near(&points, &grid, k);
    let prefactor = C64::new(0.0, -k / (2.0 * TAU)) * grid.cell_area();
    let values: Vec<DiracSpinor> = points
        .par_iter()
        .map(|p| {
            let mut acc = SpinorSum::new();
            for n in &nodes {
                let (dx, dy) = (p.x - n.x, p.y - n.y);
                let s = (dx * dx + dy * dy + p.z * p.z).sqrt();
                let kernel = n.incident * C64::from_polar(1.0 / s, k * s);
                acc.add(&transformed[n.index].scale(kernel));
            }
            acc.value().scale(prefactor)
        })
        .collect();
    SpinorField2D::new(detector.grid, values)
}

/// Spinor Fraunhofer transform: `M = γ³ − I` is applied to every aperture
/// spinor, then each component goes through [`fraunhofer_scalar`].
pub fn spinor_fraunhofer(aperture: &SpinorField2D, k: f64, detector: &DetectorSpec) -> Result<SpinorField2D> {
    let transformed = gamma_factor_oblique(&Direction3::z(), aperture);
    let parts = (0..4)
        .map(|c| fraunhofer_scalar(&transformed.component(c), k, detector))
        .collect::<Result<Vec<_>>>()?;
    SpinorField2D::from_components([&parts[0], &parts[1], &parts[2], &parts[3]])
}

/// Upper components of a spinor field and the size of what was dropped.
#[derive(Debug, Clone)]
pub struct NonRelativisticReduction {
    pub upper: [ScalarField2D; 2],
    /// `‖lower‖ / ‖upper‖` over the whole grid.
    pub lower_norm_ratio: f64,
    pub kappa: f64,
}

impl NonRelativisticReduction {
    /// `‖lower‖² / ‖upper‖²`.
    pub fn lower_power_ratio(&self) -> f64 {
        self.lower_norm_ratio * self.lower_norm_ratio
    }

    /// Whether the dropped part is within `factor·κ` in norm.
    pub fn is_consistent(&self, factor: f64) -> bool {
        self.lower_norm_ratio <= factor * self.kappa
    }
}

/// Keeps the top two components. For fields prepared from positive-energy
/// plane-wave spinors the reported lower/upper norm ratio is of order `κ`.
pub fn nonrelativistic_reduce(field: &SpinorField2D, kappa: f64) -> Result<NonRelativisticReduction> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa {kappa} must be non-negative")));
    }
    let mut upper = CompensatedSum::new();
    let mut lower = CompensatedSum::new();
    for v in field.values() {
        let (u, l) = v.block_powers();
        upper.add(u);
        lower.add(l);
    }
    let (u, l) = (upper.value(), lower.value());
    let lower_norm_ratio = if l == 0.0 {
        0.0
    } else if u == 0.0 {
        f64::INFINITY
    } else {
        (l / u).sqrt()
    };
    Ok(NonRelativisticReduction {
        upper: [field.component(0), field.component(1)],
        lower_norm_ratio,
        kappa,
    })
}

/// Applies `(1 + γⁿ)γⁿ` pixelwise.
pub fn gamma_factor_oblique(n: &Direction3, field: &SpinorField2D) -> SpinorField2D {
    let m = gamma_factor(n);
    field.map(|v| m.apply(v))
}
