//! Scalar diffraction: the Helmholtz–Kirchhoff surface integral, the
//! Kirchhoff–Fresnel aperture formula with its Rayleigh–Sommerfeld variants,
//! and the Fraunhofer far-field transform.
//!
//! Geometry: the aperture lies in the plane `z = 0`, the source on the `z < 0`
//! side and the detector on the `z > 0` side. Angles `θ₀` (incident) and `θ`
//! (diffracted) are measured from the `+z` aperture normal.

use std::f64::consts::{PI, TAU};

use log::warn;
use rayon::prelude::*;

use crate::algebra::{Direction3, ScalarWave};
use crate::apertures::ApertureMask;
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::sum::{CompensatedSum, ComplexSum};
use crate::{Vec3, C64};

/// Boundary condition family of the aperture formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObliquityKind {
    /// `(cos θ₀ + cos θ)/2`
    Kirchhoff,
    /// Vanishing field on the screen: `cos θ`
    Rs1,
    /// Vanishing normal derivative on the screen: `cos θ₀`
    Rs2,
}

impl std::str::FromStr for ObliquityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kirchhoff" => Ok(Self::Kirchhoff),
            "rs1" => Ok(Self::Rs1),
            "rs2" => Ok(Self::Rs2),
            other => Err(Error::InvalidParameter(format!("unknown obliquity kind '{other}'"))),
        }
    }
}

pub fn obliquity(kind: ObliquityKind, theta0: f64, theta: f64) -> f64 {
    obliquity_from_cosines(kind, theta0.cos(), theta.cos())
}

#[inline]
fn obliquity_from_cosines(kind: ObliquityKind, cos0: f64, cos: f64) -> f64 {
    match kind {
        ObliquityKind::Kirchhoff => 0.5 * (cos0 + cos),
        ObliquityKind::Rs1 => cos,
        ObliquityKind::Rs2 => cos0,
    }
}

/// One quadrature node of a closed surface.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceElement {
    pub position: Vec3,
    /// Outward unit normal.
    pub normal: Direction3,
    /// Area element.
    pub weight: f64,
}

/// Midpoint rule on a sphere: `n_theta × n_phi` nodes at cell centres of a
/// uniform `(θ, φ)` grid, weights `R² sin θ Δθ Δφ`.
pub fn sphere_quadrature(center: &Vec3, radius: f64, n_theta: usize, n_phi: usize) -> Result<Vec<SurfaceElement>> {
    if !(radius > 0.0) || n_theta == 0 || n_phi == 0 {
        return Err(Error::InvalidParameter(format!(
            "sphere quadrature needs radius > 0 and nonzero node counts (got {radius}, {n_theta}x{n_phi})"
        )));
    }
    let dt = PI / n_theta as f64;
    let dp = TAU / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for it in 0..n_theta {
        let theta = (it as f64 + 0.5) * dt;
        let w = radius * radius * theta.sin() * dt * dp;
        for ip in 0..n_phi {
            let phi = (ip as f64 + 0.5) * dp;
            let normal = Direction3::from_spherical(theta, phi);
            out.push(SurfaceElement { position: center + normal.as_vec() * radius, normal, weight: w });
        }
    }
    Ok(out)
}

/// Boundary datum for the Helmholtz–Kirchhoff integral.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub position: Vec3,
    /// Outward unit normal.
    pub normal: Direction3,
    pub weight: f64,
    pub value: C64,
    /// `n·∇Ψ` along the outward normal.
    pub normal_derivative: Option<C64>,
}

/// Samples an analytic scalar wave (value and outward normal derivative) on
/// the given surface.
pub fn sample_scalar_wave(surface: &[SurfaceElement], wave: &dyn ScalarWave) -> Vec<BoundarySample> {
    surface
        .iter()
        .map(|e| {
            let grad = wave.gradient(&e.position);
            let n = e.normal.as_vec();
            BoundarySample {
                position: e.position,
                normal: e.normal,
                weight: e.weight,
                value: wave.value(&e.position),
                normal_derivative: Some(grad.x * n.x + grad.y * n.y + grad.z * n.z),
            }
        })
        .collect()
}

/// Minimum target distance from any surface node, in wavelengths.
pub const SURFACE_GUARD_WAVELENGTHS: f64 = 0.1;

/// Rejects targets that are not enclosed by the sampled surface or that sit
/// too close to a node. Enclosure is decided from the discrete solid angle
/// `Σ w n·(r − r')/|r − r'|³`, which is 4π inside and 0 outside.
pub(crate) fn check_target(
    nodes: impl Iterator<Item = (Vec3, Direction3, f64)>,
    target: &Vec3,
    k: f64,
) -> Result<()> {
    let guard = SURFACE_GUARD_WAVELENGTHS * TAU / k;
    let mut solid = CompensatedSum::new();
    for (index, (position, normal, weight)) in nodes.enumerate() {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::DegenerateWeight { index, weight });
        }
        let d = position - target;
        let dist = d.norm();
        if dist < guard {
            return Err(Error::TargetTooClose { index, distance: dist, guard });
        }
        solid.add(weight * normal.as_vec().dot(&d) / (dist * dist * dist));
    }
    let fraction = solid.value() / (4.0 * PI);
    if fraction < 0.5 {
        return Err(Error::TargetOutside { fraction });
    }
    Ok(())
}

/// Field at an interior point from boundary values and normal derivatives:
///
/// ```text
/// Ψ(r') = −(1/4π) Σ w [Ψ ∂ₙG' − G' ∂ₙΨ],   G' = e^{iks}/s,  s = |r_S − r'|
/// ```
///
/// with `∂ₙ` along the outward normal (equivalently `+1/4π` with the inward
/// normal).
pub fn helmholtz_kirchhoff_integral(boundary: &[BoundarySample], target: &Vec3, k: f64) -> Result<C64> {
    if let Some(index) = boundary.iter().position(|b| b.normal_derivative.is_none()) {
        return Err(Error::MissingNormalDerivative { index });
    }
    check_target(boundary.iter().map(|b| (b.position, b.normal, b.weight)), target, k)?;
    let mut acc = ComplexSum::new();
    for b in boundary {
        let d = b.position - target;
        let s = d.norm();
        let kernel = C64::from_polar(1.0 / s, k * s);
        let cos_n = b.normal.as_vec().dot(&d) / s;
        let d_kernel = kernel * C64::new(-1.0 / s, k) * cos_n;
        let dn_psi = b.normal_derivative.expect("checked above");
        acc.add((b.value * d_kernel - kernel * dn_psi) * b.weight);
    }
    Ok(acc.value() * (-1.0 / (4.0 * PI)))
}

/// Illumination of the aperture plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    /// Unit-direction `+z` plane wave of the given complex amplitude.
    PlaneWave { amplitude: C64 },
    /// Spherical wave `A·e^{ikr}/r` from a point strictly behind the aperture.
    PointSource { position: Vec3, amplitude: C64 },
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::PlaneWave { .. } => Ok(()),
            SourceSpec::PointSource { position, .. } => {
                if position.z < 0.0 {
                    Ok(())
                } else {
                    Err(Error::Geometry(format!(
                        "point source at z = {} must lie strictly behind the aperture plane (z < 0)",
                        position.z
                    )))
                }
            }
        }
    }

    /// Incident field at aperture point `(x, y, 0)`, and `cos θ₀`.
    #[inline]
    pub(crate) fn incident(&self, x: f64, y: f64, k: f64) -> (C64, f64, Option<f64>) {
        match *self {
            SourceSpec::PlaneWave { amplitude } => (amplitude, 1.0, None),
            SourceSpec::PointSource { position, amplitude } => {
                let d = Vec3::new(x - position.x, y - position.y, -position.z);
                let r0 = d.norm();
                (amplitude * C64::from_polar(1.0 / r0, k * r0), d.z / r0, Some(r0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorMode {
    /// Grid coordinates are positions `(x, y)` in the plane `z = distance`.
    RealPlane,
    /// Grid coordinates are transverse wavenumbers `(k_x, k_y)`; propagators
    /// that need positions place the point at `distance·(k_x, k_y, k_z)/k`.
    Angular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub distance: f64,
    pub grid: Grid2D,
    pub mode: DetectorMode,
}

impl DetectorSpec {
    pub fn new(distance: f64, grid: Grid2D, mode: DetectorMode) -> Result<Self> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::Geometry(format!("detector distance {distance} must be positive")));
        }
        Ok(Self { distance, grid, mode })
    }

    /// Positions of the detector pixels, row-major.
    pub fn points(&self, k: f64) -> Result<Vec<Vec3>> {
        let g = &self.grid;
        (0..g.len())
            .map(|i| {
                let (a, b) = g.coords(i);
                match self.mode {
                    DetectorMode::RealPlane => Ok(Vec3::new(a, b, self.distance)),
                    DetectorMode::Angular => {
                        let kz2 = k * k - a * a - b * b;
                        if !(kz2 > 0.0) {
                            return Err(Error::Geometry(format!(
                                "angular pixel ({a}, {b}) has no forward component (k = {k}); it would lie in the aperture plane"
                            )));
                        }
                        Ok(Vec3::new(a, b, kz2.sqrt()) * (self.distance / k))
                    }
                }
            })
            .collect()
    }

    /// Transverse wavenumbers `(k_x per column, k_y per row)`.
    pub fn frequencies(&self, k: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = &self.grid;
        let (kx, ky): (Vec<f64>, Vec<f64>) = match self.mode {
            DetectorMode::Angular => ((0..g.nx).map(|i| g.x(i)).collect(), (0..g.ny).map(|j| g.y(j)).collect()),
            DetectorMode::RealPlane => {
                let scale = k / self.distance;
                ((0..g.nx).map(|i| g.x(i) * scale).collect(), (0..g.ny).map(|j| g.y(j) * scale).collect())
            }
        };
        if self.mode == DetectorMode::Angular {
            if let Some(bad) = kx.iter().chain(ky.iter()).find(|v| v.abs() > k) {
                return Err(Error::Geometry(format!("angular frequency {bad} exceeds k = {k}")));
            }
        }
        Ok((kx, ky))
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("wavenumber {k} must be finite and positive")));
    }
    Ok(())
}

/// Open aperture pixel with everything the kernel needs precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ApertureNode {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    /// Incident factor `e^{ikr₀}/r₀` (or the plane-wave amplitude).
    pub incident: C64,
    pub cos0: f64,
}

/// Nodes for every pixel where `open(index)` holds, in row-major order.
pub(crate) fn aperture_nodes(grid: &Grid2D, source: &SourceSpec, k: f64, open: impl Fn(usize) -> bool) -> Vec<ApertureNode> {
    let mut min_kr0 = f64::INFINITY;
    let nodes: Vec<ApertureNode> = (0..grid.len())
        .filter(|&i| open(i))
        .map(|index| {
            let (x, y) = grid.coords(index);
            let (incident, cos0, r0) = source.incident(x, y, k);
            if let Some(r0) = r0 {
                min_kr0 = min_kr0.min(k * r0);
            }
            ApertureNode { index, x, y, incident, cos0 }
        })
        .collect();
    if min_kr0 < 10.0 {
        warn!("k·r0 = {min_kr0:.3} < 10: the aperture formula assumes the source is many wavelengths away");
    }
    nodes
}

pub(crate) fn warn_if_near(points: &[Vec3], grid: &Grid2D, k: f64) {
    let (hx, hy) = grid.half_extent();
    let min_ks = points
        .iter()
        .map(|p| k * (p.z * p.z + (p.x.abs() - hx).max(0.0).powi(2) + (p.y.abs() - hy).max(0.0).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    if min_ks < 10.0 {
        warn!("k·s = {min_ks:.3} < 10: the aperture formula assumes the detector is many wavelengths away");
    }
}

/// Kirchhoff–Fresnel aperture propagation.
///
/// For each detector point `P`:
///
/// ```text
/// Ψ(P) = −(ik/2π) Σ_Q [e^{ik(r₀+s)}/(r₀ s)] · K(θ₀, θ) · T(Q) · ΔX ΔY
/// ```
///
/// where `T` is the aperture transmission, the incident factor
/// `e^{ikr₀}/r₀` is applied analytically (plane-wave sources contribute their
/// amplitude and `θ₀ = 0`), and `K` is the obliquity factor of `kind`. The
/// common prefactor makes the Kirchhoff result the exact average of the two
/// Rayleigh–Sommerfeld results.
pub fn kirchhoff_fresnel(
    aperture: &ScalarField2D,
    source: &SourceSpec,
    detector: &DetectorSpec,
    k: f64,
    kind: ObliquityKind,
) -> Result<ScalarField2D> {
    check_k(k)?;
    source.validate()?;
    let grid = *aperture.grid();
    let transmission = aperture.values();
    let nodes = aperture_nodes(&grid, source, k, |i| transmission[i] != C64::new(0.0, 0.0));
    let points = detector.points(k)?;
    warn_if_near(&points, &grid, k);
    let prefactor = C64::new(0.0, -k / TAU) * grid.cell_area();
    let values: Vec<C64> = points
        .par_iter()
        .map(|p| {
            let mut acc = ComplexSum::new();
            for n in &nodes {
                let (dx, dy) = (p.x - n.x, p.y - n.y);
                let s = (dx * dx + dy * dy + p.z * p.z).sqrt();
                let ob = obliquity_from_cosines(kind, n.cos0, p.z / s);
                let kernel = C64::from_polar(ob / s, k * s);
                acc.add(n.incident * transmission[n.index] * kernel);
            }
            acc.value() * prefactor
        })
        .collect();
    ScalarField2D::new(detector.grid, values)
}

/// Fraunhofer transform `Ψ(k_x, k_y) = Σ e^{−i(k_x X + k_y Y)} Ψ_Ap(X, Y) ΔX ΔY`
/// with unit prefactor.
///
/// The sum is evaluated separably (first along X, then along Y) in fixed
/// order. In real-plane mode pixel `(x, y)` maps to `(k x/z, k y/z)`.
pub fn fraunhofer_scalar(aperture: &ScalarField2D, k: f64, detector: &DetectorSpec) -> Result<ScalarField2D> {
    check_k(k)?;
    let (kx, ky) = detector.frequencies(k)?;
    let grid = *aperture.grid();
    let (hx, hy) = grid.half_extent();
    let half = hx.max(hy);
    if detector.distance < 2.0 * k * half * half {
        warn!(
            "detector distance {} is below the Fraunhofer scale 2k·a² = {:.3e}; the far-field transform is only approximate there",
            detector.distance,
            2.0 * k * half * half
        );
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let values = aperture.values();

    let phase_table = |freqs: &[f64], coords: &[f64]| -> Vec<C64> {
        freqs
            .iter()
            .flat_map(|&f| coords.iter().map(move |&c| C64::from_polar(1.0, -f * c)))
            .collect()
    };
    let xs: Vec<f64> = (0..nx).map(|i| grid.x(i)).collect();
    let ys: Vec<f64> = (0..ny).map(|j| grid.y(j)).collect();
    let ex = phase_table(&kx, &xs);
    let ey = phase_table(&ky, &ys);
    let zero = C64::new(0.0, 0.0);

    // rows[iy][ikx] = Σ_ix e^{−i kx X} Ψ(ix, iy)
    let rows: Vec<Option<Vec<C64>>> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let row = &values[iy * nx..(iy + 1) * nx];
            if row.iter().all(|v| *v == zero) {
                return None;
            }
            Some(
                (0..kx.len())
                    .map(|ikx| {
                        let phases = &ex[ikx * nx..(ikx + 1) * nx];
                        let mut acc = ComplexSum::new();
                        for (p, v) in phases.iter().zip(row) {
                            if *v != zero {
                                acc.add(p * v);
                            }
                        }
                        acc.value()
                    })
                    .collect(),
            )
        })
        .collect();

    let area = grid.cell_area();
    let out: Vec<C64> = (0..ky.len())
        .into_par_iter()
        .flat_map_iter(|iky| {
            let phases = &ey[iky * ny..(iky + 1) * ny];
            let rows = &rows;
            (0..kx.len()).map(move |ikx| {
                let mut acc = ComplexSum::new();
                for (p, row) in phases.iter().zip(rows.iter()) {
                    if let Some(row) = row {
                        acc.add(p * row[ikx]);
                    }
                }
                acc.value() * area
            })
        })
        .collect();
    ScalarField2D::new(detector.grid, out)
}

/// Incident field on the aperture grid times the mask: `A·e^{ikr}/r` for a
/// point source (`r` the distance from the source), `A` for a plane wave.
pub fn illuminate(mask: &ApertureMask, source: &SourceSpec, k: f64) -> Result<ScalarField2D> {
    check_k(k)?;
    source.validate()?;
    let field = mask.field();
    let grid = *field.grid();
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (x, y) = grid.coords(i);
            source.incident(x, y, k).0 * t
        })
        .collect();
    ScalarField2D::new(grid, values)
}
