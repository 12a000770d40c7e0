//! Uniform rectangular sampling grids and the fields stored on them.
//!
//! Values are row-major: index `iy·nx + ix` holds the sample at
//! `(origin.x + ix·dx, origin.y + iy·dy)`.

use crate::algebra::DiracSpinor;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: [f64; 2],
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("dimensions {nx}x{ny} must be nonzero")));
        }
        if !(dx > 0.0 && dy > 0.0) || !dx.is_finite() || !dy.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing ({dx}, {dy}) must be finite and positive")));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { nx, ny, dx, dy, origin })
    }

    /// Square `n × n` grid covering `[−extent/2, extent/2]²` with pixel
    /// centres symmetric about zero.
    pub fn centered(n: usize, extent: f64) -> Result<Self> {
        Self::centered_rect(n, n, extent, extent)
    }

    pub fn centered_rect(nx: usize, ny: usize, extent_x: f64, extent_y: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("dimensions {nx}x{ny} must be nonzero")));
        }
        let dx = extent_x / nx as f64;
        let dy = extent_y / ny as f64;
        let origin = [-0.5 * (nx as f64 - 1.0) * dx, -0.5 * (ny as f64 - 1.0) * dy];
        Self::new(nx, ny, dx, dy, origin)
    }

    /// Grid with the given spacing whose pixel centres are symmetric about
    /// `center`.
    pub fn around(nx: usize, ny: usize, dx: f64, dy: f64, center: [f64; 2]) -> Result<Self> {
        let origin = [
            center[0] - 0.5 * (nx as f64 - 1.0) * dx,
            center[1] - 0.5 * (ny as f64 - 1.0) * dy,
        ];
        Self::new(nx, ny, dx, dy, origin)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        self.origin[0] + ix as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        self.origin[1] + iy as f64 * self.dy
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Physical coordinates of the sample at flat `index`.
    #[inline]
    pub fn coords(&self, index: usize) -> (f64, f64) {
        (self.x(index % self.nx), self.y(index / self.nx))
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Half widths of the sampled region measured from the origin of the
    /// coordinate system, i.e. the largest |x| and |y| of any pixel edge.
    pub fn half_extent(&self) -> (f64, f64) {
        let x0 = self.origin[0] - 0.5 * self.dx;
        let x1 = self.x(self.nx - 1) + 0.5 * self.dx;
        let y0 = self.origin[1] - 0.5 * self.dy;
        let y1 = self.y(self.ny - 1) + 0.5 * self.dy;
        (x0.abs().max(x1.abs()), y0.abs().max(y1.abs()))
    }

    pub fn same_shape(&self, other: &Grid2D) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }
}

/// Values of type `T` sampled on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T> {
    grid: Grid2D,
    values: Vec<T>,
}

pub type ScalarField2D = Field2D<C64>;
pub type SpinorField2D = Field2D<DiracSpinor>;
pub type RealGrid = Field2D<f64>;

impl<T> Field2D<T> {
    pub fn new(grid: Grid2D, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.coords(i);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> &T {
        &self.values[self.grid.index(ix, iy)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field2D<U> {
        Field2D { grid: self.grid, values: self.values.iter().map(f).collect() }
    }
}

impl<T: Clone> Field2D<T> {
    pub fn filled(grid: Grid2D, value: T) -> Self {
        Self { values: vec![value; grid.len()], grid }
    }
}

impl Field2D<C64> {
    pub fn scale(&self, factor: C64) -> Self {
        self.map(|v| v * factor)
    }

    /// Σ|ψ|² over all pixels (no cell-area weighting).
    pub fn power(&self) -> f64 {
        crate::sum::sum_f64(&self.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>())
    }
}

impl Field2D<DiracSpinor> {
    /// Component `c` as a scalar field.
    pub fn component(&self, c: usize) -> ScalarField2D {
        self.map(|s| s.component(c))
    }

    /// Reassembles a spinor field from four component fields on one grid.
    pub fn from_components(parts: [&ScalarField2D; 4]) -> Result<Self> {
        let grid = *parts[0].grid();
        if parts.iter().any(|p| !p.grid().same_shape(&grid)) {
            return Err(Error::ShapeMismatch("component grids differ".into()));
        }
        let values = (0..grid.len())
            .map(|i| DiracSpinor::new(std::array::from_fn(|c| parts[c].values()[i])))
            .collect();
        Ok(Self { grid, values })
    }

    /// Scalar profile times a constant spinor.
    pub fn from_profile(profile: &ScalarField2D, spinor: &DiracSpinor) -> Self {
        profile.map(|v| spinor.scale(*v))
    }
}
