//! Free-space Helmholtz Green's function, its analytic gradient and the
//! Dirac Green's matrix built from it.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::algebra::{gamma_direction, gamma_dot, Direction3, GammaMatrix, ParticleState};
use crate::error::{Error, Result};
use crate::{Vec3, C64};

/// Separations below this are treated as coincident points.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Distance `s = |r − r'|` and unit vector `ŝ = (r − r')/s`.
#[derive(Debug, Clone, Copy)]
pub struct Separation {
    pub s: f64,
    pub unit: Direction3,
}

impl Separation {
    pub fn between(r: &Vec3, rp: &Vec3) -> Result<Self> {
        let d = r - rp;
        let s = d.norm();
        if !(s > MIN_SEPARATION) {
            return Err(Error::CoincidentPoints(s));
        }
        Ok(Self { s, unit: Direction3::from_unit_unchecked(d / s) })
    }
}

/// `e^{iks}/(4πs)` for a known separation.
#[inline]
pub fn green_at(s: f64, k: f64) -> C64 {
    C64::from_polar(1.0 / (4.0 * PI * s), k * s)
}

/// Outgoing scalar Green's function `G(r, r') = e^{ik|r−r'|}/(4π|r−r'|)`.
pub fn green_scalar(r: &Vec3, rp: &Vec3, k: f64) -> Result<C64> {
    let sep = Separation::between(r, rp)?;
    Ok(green_at(sep.s, k))
}

/// `∇_r G = (ik − 1/s)·G·ŝ`.
pub fn green_scalar_gradient(r: &Vec3, rp: &Vec3, k: f64) -> Result<Vector3<C64>> {
    let sep = Separation::between(r, rp)?;
    let radial = C64::new(-1.0 / sep.s, k) * green_at(sep.s, k);
    Ok(sep.unit.as_vec().map(|u| radial * u))
}

/// Dirac Green's matrix `g(r, r') = (iγʲ∂ⱼ − γ⁰E − m)·G(r, r')`, derivatives
/// acting on `r`.
///
/// In closed form `g = k·[B − (1 + i/(ks))·γ^ŝ]·G` with the mass–energy block
/// `B = −(γ⁰E + m)/k`. It satisfies the right-acting equation
/// `g·(−i∂⃖ⱼγʲ + γ⁰E − m) = δ(r − r')`, which is what makes
/// [`crate::spinor::spinor_surface_integral`] reproduce interior values.
pub fn green_matrix(r: &Vec3, rp: &Vec3, state: &ParticleState) -> Result<GammaMatrix> {
    let sep = Separation::between(r, rp)?;
    Ok(green_matrix_at(&sep, state))
}

#[inline]
pub(crate) fn green_matrix_at(sep: &Separation, state: &ParticleState) -> GammaMatrix {
    let k = state.k();
    let g = green_at(sep.s, k);
    let radial = -k * C64::new(1.0, 1.0 / (k * sep.s)) * g;
    gamma_direction(&sep.unit).scale(radial) - state.conjugate_mass_energy_block().scale(g)
}

/// The mass–energy block `B = −(γ⁰E + m)/k` of the closed form.
pub fn mass_energy_coefficient(state: &ParticleState) -> GammaMatrix {
    state.conjugate_mass_energy_block() * (-1.0 / state.k())
}

/// Checks `γʲ∂ⱼG = ik(1 + i/(ks))·γʲG·∂ⱼs`, left side from the analytic
/// gradient, right side from the separation geometry. Returns the largest
/// entrywise difference relative to the largest entry.
pub fn verify_gamma_derivative_identity(r: &Vec3, rp: &Vec3, k: f64) -> Result<f64> {
    let grad = green_scalar_gradient(r, rp, k)?;
    let lhs = gamma_dot(&grad);
    let sep = Separation::between(r, rp)?;
    let factor = C64::new(0.0, k) * C64::new(1.0, 1.0 / (k * sep.s)) * green_at(sep.s, k);
    let rhs = gamma_direction(&sep.unit).scale(factor);
    let scale = lhs.max_abs().max(rhs.max_abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs.max_abs_diff(&rhs) / scale)
}
