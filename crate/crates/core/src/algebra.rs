//! Dirac algebra: gamma matrices in the Dirac representation, spinors,
//! plane-wave eigenstates and construction of stationary Dirac solutions.
//!
//! The stationary Dirac operator used throughout is
//!
//! ```text
//! D = i γʲ ∂ⱼ + γ⁰ E − m
//! ```
//!
//! for a state of energy `E`, mass `m` and wavenumber `k = √(E² − m²)`; every
//! component of a solution of `DΨ = 0` solves the Helmholtz equation with
//! that `k`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::{Vec3, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Diagonal of the Minkowski metric, signature (+, −, −, −).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// A 4×4 complex matrix of the Dirac algebra.
#[derive(Clone, Copy, PartialEq)]
pub struct GammaMatrix(Matrix4<C64>);

impl GammaMatrix {
    pub fn from_rows(rows: [[C64; 4]; 4]) -> Self {
        Self(Matrix4::from_fn(|r, c| rows[r][c]))
    }

    pub fn from_real_rows(rows: [[f64; 4]; 4]) -> Self {
        Self(Matrix4::from_fn(|r, c| C64::new(rows[r][c], 0.0)))
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn zeros() -> Self {
        Self(Matrix4::zeros())
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(self.0 * factor)
    }

    /// `self·other + other·self`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 + other.0 * self.0)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[inline]
    pub fn apply(&self, s: &DiracSpinor) -> DiracSpinor {
        let m = &self.0;
        let v = &s.0;
        DiracSpinor(std::array::from_fn(|r| {
            m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3]
        }))
    }
}

impl fmt::Debug for GammaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GammaMatrix[")?;
        for r in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|c| {
                    let z = self.0[(r, c)];
                    format!("{:+.3}{:+.3}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join("  "))?;
        }
        write!(f, "]")
    }
}

impl Add for GammaMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for GammaMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for GammaMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul for GammaMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Mul<f64> for GammaMatrix {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * C64::new(rhs, 0.0))
    }
}

impl Mul<DiracSpinor> for GammaMatrix {
    type Output = DiracSpinor;
    fn mul(self, rhs: DiracSpinor) -> DiracSpinor {
        self.apply(&rhs)
    }
}

/// Four-component Dirac spinor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiracSpinor([C64; 4]);

impl DiracSpinor {
    pub const fn new(components: [C64; 4]) -> Self {
        Self(components)
    }

    pub fn from_real(components: [f64; 4]) -> Self {
        Self(components.map(|x| C64::new(x, 0.0)))
    }

    pub const fn zero() -> Self {
        Self([ZERO; 4])
    }

    #[inline]
    pub fn components(&self) -> &[C64; 4] {
        &self.0
    }

    #[inline]
    pub fn component(&self, index: usize) -> C64 {
        self.0[index]
    }

    /// Σ|ψ_c|².
    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, factor: C64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// Power in the upper (large) and lower (small) two-component blocks.
    pub fn block_powers(&self) -> (f64, f64) {
        (
            self.0[0].norm_sqr() + self.0[1].norm_sqr(),
            self.0[2].norm_sqr() + self.0[3].norm_sqr(),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for DiracSpinor {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for DiracSpinor {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<C64> for DiracSpinor {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

/// Real unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction3(Vec3);

impl Direction3 {
    /// Tolerance on `|n| − 1` accepted by [`Direction3::new`].
    pub const UNIT_TOLERANCE: f64 = 1e-9;

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        let deviation = norm - 1.0;
        if !norm.is_finite() || deviation.abs() > Self::UNIT_TOLERANCE {
            return Err(Error::NotUnitVector { x, y, z, deviation });
        }
        Ok(Self(Vector3::new(x, y, z)))
    }

    /// Normalises an arbitrary nonzero vector.
    pub fn normalize(v: &Vec3) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Singular("cannot normalise a zero or non-finite vector"));
        }
        Ok(Self(v / norm))
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(Vector3::new(st * cp, st * sp, ct))
    }

    pub fn z() -> Self {
        Self(Vector3::new(0.0, 0.0, 1.0))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn zc(&self) -> f64 {
        self.0.z
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    /// Trusted constructor for vectors that are unit length by construction.
    pub(crate) fn from_unit_unchecked(v: Vec3) -> Self {
        Self(v)
    }
}

impl Neg for Direction3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Energy, mass and wavenumber of a stationary state (natural units).
///
/// The three quantities always satisfy the relativistic dispersion
/// `k² = E² − m²`. The alternative relation `k² = E² + m²` appears in some
/// write-ups of the stationary reduction; it is deliberately not used because
/// the plane-wave spinor `(1, 0, k/(E+m), 0)` solves the Dirac equation only
/// under `k² = E² − m²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    energy: f64,
    mass: f64,
    k: f64,
}

impl ParticleState {
    /// `k = √(E² − m²)`; requires `E > m ≥ 0`.
    pub fn from_energy_mass(energy: f64, mass: f64) -> Result<Self> {
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(Error::InvalidState(format!("mass {mass} must be finite and >= 0")));
        }
        if !(energy > mass) || !energy.is_finite() {
            return Err(Error::InvalidState(format!(
                "energy {energy} must exceed the mass {mass} for a propagating state"
            )));
        }
        let k = ((energy - mass) * (energy + mass)).sqrt();
        Ok(Self { energy, mass, k })
    }

    /// `E = √(k² + m²)`.
    pub fn from_wavenumber_mass(k: f64, mass: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidState(format!("wavenumber {k} must be finite and > 0")));
        }
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(Error::InvalidState(format!("mass {mass} must be finite and >= 0")));
        }
        Ok(Self { energy: k.hypot(mass), mass, k })
    }

    /// Massless state, `E = k`.
    pub fn massless(k: f64) -> Result<Self> {
        Self::from_wavenumber_mass(k, 0.0)
    }

    /// State with wavenumber `k` and small-component ratio `κ = k/(E+m)`,
    /// `0 < κ ≤ 1`. `κ → 0` is the non-relativistic limit, `κ = 1` massless.
    pub fn from_wavenumber_kappa(k: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidState(format!("kappa {kappa} must lie in (0, 1]")));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidState(format!("wavenumber {k} must be finite and > 0")));
        }
        let energy = 0.5 * k * (1.0 / kappa + kappa);
        let mass = (0.5 * k * (1.0 / kappa - kappa)).max(0.0);
        Ok(Self { energy, mass, k })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn wavelength(&self) -> f64 {
        std::f64::consts::TAU / self.k
    }

    /// `κ = k/(E+m)`, the lower-to-upper amplitude ratio of a plane wave.
    pub fn kappa(&self) -> f64 {
        self.k / (self.energy + self.mass)
    }

    /// The mass–energy block `γ⁰E − m` of the stationary Dirac operator.
    pub fn mass_energy_block(&self) -> GammaMatrix {
        let (e, m) = (self.energy, self.mass);
        GammaMatrix::from_real_rows([
            [e - m, 0.0, 0.0, 0.0],
            [0.0, e - m, 0.0, 0.0],
            [0.0, 0.0, -e - m, 0.0],
            [0.0, 0.0, 0.0, -e - m],
        ])
    }

    /// `γ⁰E + m`, which appears in solution construction and the Green's matrix.
    pub fn conjugate_mass_energy_block(&self) -> GammaMatrix {
        let (e, m) = (self.energy, self.mass);
        GammaMatrix::from_real_rows([
            [e + m, 0.0, 0.0, 0.0],
            [0.0, e + m, 0.0, 0.0],
            [0.0, 0.0, m - e, 0.0],
            [0.0, 0.0, 0.0, m - e],
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn eigenvalue(&self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// Dirac-representation generator γ^μ.
pub fn gamma(mu: usize) -> Result<GammaMatrix> {
    let (o, l) = (ONE, ZERO);
    let m = match mu {
        0 => [[o, l, l, l], [l, o, l, l], [l, l, -o, l], [l, l, l, -o]],
        1 => [[l, l, l, o], [l, l, o, l], [l, -o, l, l], [-o, l, l, l]],
        2 => [[l, l, l, -I], [l, l, I, l], [l, I, l, l], [-I, l, l, l]],
        3 => [[l, l, o, l], [l, l, l, -o], [-o, l, l, l], [l, o, l, l]],
        _ => return Err(Error::InvalidGammaIndex(mu)),
    };
    Ok(GammaMatrix::from_rows(m))
}

fn spatial_gammas() -> [GammaMatrix; 3] {
    [1, 2, 3].map(|mu| gamma(mu).expect("spatial index"))
}

/// `nₓγ¹ + n_yγ² + n_zγ³`; squares to −I.
pub fn gamma_direction(n: &Direction3) -> GammaMatrix {
    let [g1, g2, g3] = spatial_gammas();
    g1 * n.x() + g2 * n.y() + g3 * n.zc()
}

/// `γ^v` for an arbitrary (not necessarily unit) real or complex 3-vector.
pub(crate) fn gamma_dot(v: &Vector3<C64>) -> GammaMatrix {
    let [g1, g2, g3] = spatial_gammas();
    g1.scale(v.x) + g2.scale(v.y) + g3.scale(v.z)
}

/// The diffraction γ-factor `(I + γⁿ)γⁿ`, equal to `γⁿ − I`.
pub fn gamma_factor(n: &Direction3) -> GammaMatrix {
    let gn = gamma_direction(n);
    (GammaMatrix::identity() + gn) * gn
}

/// Σ_z = diag(1, −1, 1, −1).
pub fn sigma_z() -> GammaMatrix {
    GammaMatrix::from_real_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
}

/// Unnormalised spinor part of a plane wave travelling along +z with spin
/// quantised along z: `(1, 0, κ, 0)` for spin up, `(0, 1, 0, −κ)` for spin
/// down, `κ = k/(E+m)`.
pub fn plane_wave_spinor(state: &ParticleState, direction: &Direction3, spin: Spin) -> Result<DiracSpinor> {
    let along_z = direction.x().abs() < Direction3::UNIT_TOLERANCE
        && direction.y().abs() < Direction3::UNIT_TOLERANCE
        && direction.zc() > 0.0;
    if !along_z {
        return Err(Error::InvalidParameter(
            "built-in plane-wave spinors are quantised along +z only".into(),
        ));
    }
    let denom = state.energy() + state.mass();
    if denom == 0.0 {
        return Err(Error::Singular("E + m vanishes"));
    }
    let kappa = state.k() / denom;
    Ok(match spin {
        Spin::Up => DiracSpinor::from_real([1.0, 0.0, kappa, 0.0]),
        Spin::Down => DiracSpinor::from_real([0.0, 1.0, 0.0, -kappa]),
    })
}

/// `⟨s|Σ_z|s⟩ / ⟨s|s⟩`.
pub fn sigma_z_expectation(s: &DiracSpinor) -> Result<f64> {
    let c = s.components();
    let up = c[0].norm_sqr() + c[2].norm_sqr();
    let down = c[1].norm_sqr() + c[3].norm_sqr();
    let total = up + down;
    if !(total > 0.0) {
        return Err(Error::Singular("spinor has zero norm"));
    }
    Ok((up - down) / total)
}

/// A scalar Helmholtz field with an analytic gradient.
pub trait ScalarWave: Send + Sync {
    fn value(&self, r: &Vec3) -> C64;
    fn gradient(&self, r: &Vec3) -> Vector3<C64>;
}

/// A spinor-valued field.
pub trait SpinorWave: Send + Sync {
    fn spinor(&self, r: &Vec3) -> DiracSpinor;
}

impl<F> SpinorWave for F
where
    F: Fn(&Vec3) -> DiracSpinor + Send + Sync,
{
    fn spinor(&self, r: &Vec3) -> DiracSpinor {
        self(r)
    }
}

/// `A·e^{ik n·r}`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub k: f64,
    pub direction: Direction3,
    pub amplitude: C64,
}

impl ScalarWave for PlaneWave {
    fn value(&self, r: &Vec3) -> C64 {
        self.amplitude * C64::from_polar(1.0, self.k * self.direction.as_vec().dot(r))
    }

    fn gradient(&self, r: &Vec3) -> Vector3<C64> {
        let v = self.value(r) * I * self.k;
        self.direction.as_vec().map(|n| v * n)
    }
}

/// Outgoing spherical wave `A·e^{ik|r−c|}/|r−c|`.
#[derive(Debug, Clone, Copy)]
pub struct SphericalWave {
    pub k: f64,
    pub center: Vec3,
    pub amplitude: C64,
}

impl ScalarWave for SphericalWave {
    fn value(&self, r: &Vec3) -> C64 {
        let s = (r - self.center).norm();
        self.amplitude * C64::from_polar(1.0 / s, self.k * s)
    }

    fn gradient(&self, r: &Vec3) -> Vector3<C64> {
        let d = r - self.center;
        let s = d.norm();
        let radial = self.value(r) * C64::new(-1.0 / s, self.k) / s;
        d.map(|x| radial * x)
    }
}

/// The identically vanishing field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroWave;

impl ScalarWave for ZeroWave {
    fn value(&self, _r: &Vec3) -> C64 {
        ZERO
    }

    fn gradient(&self, _r: &Vec3) -> Vector3<C64> {
        Vector3::zeros()
    }
}

/// Plane-wave Dirac solution `A·e^{ikz}·u` with `u` from [`plane_wave_spinor`].
#[derive(Debug, Clone, Copy)]
pub struct PlaneWaveSpinor {
    k: f64,
    spinor: DiracSpinor,
}

impl PlaneWaveSpinor {
    pub fn new(state: &ParticleState, spin: Spin, amplitude: C64) -> Self {
        let u = plane_wave_spinor(state, &Direction3::z(), spin).expect("z-directed spinor");
        Self { k: state.k(), spinor: u.scale(amplitude) }
    }

    pub fn amplitude_spinor(&self) -> DiracSpinor {
        self.spinor
    }
}

impl SpinorWave for PlaneWaveSpinor {
    fn spinor(&self, r: &Vec3) -> DiracSpinor {
        self.spinor.scale(C64::from_polar(1.0, self.k * r.z))
    }
}

/// Dirac solution built from four scalar Helmholtz solutions,
/// `Ψ = (iγʲ∂ⱼ + γ⁰E + m)(ψ⁰, ψ¹, ψ², ψ³)ᵀ`.
pub struct DiracSolution {
    components: [Box<dyn ScalarWave>; 4],
    block: GammaMatrix,
    gammas: [GammaMatrix; 3],
}

/// Lifts four scalar solutions of `(∇² + k²)ψ = 0` to a solution of the
/// stationary Dirac equation for `state`.
pub fn construct_dirac_solution(components: [Box<dyn ScalarWave>; 4], state: &ParticleState) -> DiracSolution {
    DiracSolution {
        components,
        block: state.conjugate_mass_energy_block(),
        gammas: spatial_gammas(),
    }
}

impl SpinorWave for DiracSolution {
    fn spinor(&self, r: &Vec3) -> DiracSpinor {
        let values = DiracSpinor::new(std::array::from_fn(|c| self.components[c].value(r)));
        let grads: [Vector3<C64>; 4] = std::array::from_fn(|c| self.components[c].gradient(r));
        let mut out = self.block.apply(&values);
        for (j, g) in self.gammas.iter().enumerate() {
            let dj = DiracSpinor::new(std::array::from_fn(|c| grads[c][j] * I));
            out = out + g.apply(&dj);
        }
        out
    }
}

/// Default finite-difference step, `10⁻⁵·λ`.
pub fn default_residual_step(k: f64) -> f64 {
    1e-5 * std::f64::consts::TAU / k
}

/// `(iγʲ∂ⱼ + γ⁰E − m)Ψ` at `point` by second-order central differences.
pub fn dirac_residual(field: &dyn SpinorWave, point: &Vec3, state: &ParticleState, h: f64) -> DiracSpinor {
    let gammas = spatial_gammas();
    let mut out = state.mass_energy_block().apply(&field.spinor(point));
    for (j, g) in gammas.iter().enumerate() {
        let mut step = Vec3::zeros();
        step[j] = h;
        let fwd = field.spinor(&(point + step));
        let bwd = field.spinor(&(point - step));
        let derivative = (fwd - bwd).scale(C64::new(0.0, 0.5 / h));
        out = out + g.apply(&derivative);
    }
    out
}
