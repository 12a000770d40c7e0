//! Scalar and Dirac-spinor Kirchhoff diffraction.
//!
//! The crate is organised around the propagation chain of a diffraction
//! experiment: aperture masks ([`apertures`]) are illuminated and carried to a
//! detector by the scalar propagators in [`scalar`] or by their four-component
//! spinor counterparts in [`spinor`]. Both families rest on the gamma-matrix
//! algebra in [`algebra`] and the closed-form kernels in [`green`]. Observables
//! and comparison metrics live in [`analysis`]; [`fgrid`] is the portable text
//! format used to exchange fields.
//!
//! Natural units (ħ = c = 1) are used throughout, so energies, masses and
//! wavenumbers share the same inverse-length dimension.

pub mod algebra;
pub mod analysis;
pub mod apertures;
pub mod error;
pub mod fgrid;
pub mod green;
pub mod grid;
pub mod scalar;
pub mod spinor;
pub mod sum;

pub use algebra::{DiracSpinor, Direction3, GammaMatrix, ParticleState, Spin};
pub use error::{Error, Result};
pub use grid::{Field2D, Grid2D, RealGrid, ScalarField2D, SpinorField2D};

/// Double precision complex number used for every field value.
pub type C64 = num_complex::Complex64;

/// Cartesian position or displacement (length units).
pub type Vec3 = nalgebra::Vector3<f64>;
