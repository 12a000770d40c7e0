//! Observables and comparison metrics on sampled fields.

use std::f64::consts::{PI, TAU};

use crate::algebra::{sigma_z_expectation, DiracSpinor};
use crate::error::{Error, Result};
use crate::grid::{Field2D, RealGrid, ScalarField2D, SpinorField2D};
use crate::sum::{CompensatedSum, ComplexSum};
use crate::C64;

/// Pixels with magnitude below this have no defined phase or spin.
pub const MASK_THRESHOLD: f64 = 1e-30;

/// A grid of values that may be undefined.
pub type MaskedGrid = Field2D<Option<f64>>;

/// Pixel types whose complex parts can be read as a flat slice.
pub trait PixelValue {
    fn parts(&self) -> &[C64];

    fn power(&self) -> f64 {
        self.parts().iter().map(|c| c.norm_sqr()).sum()
    }
}

impl PixelValue for C64 {
    fn parts(&self) -> &[C64] {
        std::slice::from_ref(self)
    }
}

impl PixelValue for DiracSpinor {
    fn parts(&self) -> &[C64] {
        self.components()
    }
}

/// `|Ψ|²`, summed over components for spinors.
pub fn intensity<T: PixelValue>(field: &Field2D<T>) -> RealGrid {
    field.map(|v| v.power())
}

/// Principal argument in `(−π, π]`; pixels below [`MASK_THRESHOLD`] are `None`.
pub fn phase(field: &ScalarField2D) -> MaskedGrid {
    field.map(|v| {
        if v.norm() < MASK_THRESHOLD {
            return None;
        }
        let a = v.arg();
        Some(if a <= -PI { PI } else { a })
    })
}

/// `⟨Σ_z⟩` per pixel; pixels with spinor norm below [`MASK_THRESHOLD`] are `None`.
pub fn spin_density(field: &SpinorField2D) -> MaskedGrid {
    field.map(|v| if v.norm() < MASK_THRESHOLD { None } else { sigma_z_expectation(v).ok() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Unrounded `Σ Δφ / 2π`.
    pub raw: f64,
    /// `raw − winding`.
    pub residual: f64,
    pub samples: usize,
}

fn wrap(d: f64) -> f64 {
    let w = d - TAU * (d / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Phase winding around a circle of `radius` pixels centred at pixel
/// coordinates `(cx, cy)`, traversed counterclockwise in `(x, y)`.
///
/// The loop uses `round(8·radius)` equally spaced samples, each taken from the
/// nearest pixel.
pub fn winding_number(phase: &MaskedGrid, center: (f64, f64), radius: f64) -> Result<Winding> {
    if !(radius >= 3.0) {
        return Err(Error::InvalidParameter(format!("loop radius {radius} px is below 3 px")));
    }
    let g = phase.grid();
    if !(g.dx > 0.0 && g.dy > 0.0) {
        return Err(Error::InvalidGrid("winding loops need positive spacings".into()));
    }
    let n = (8.0 * radius).round() as usize;
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let t = TAU * j as f64 / n as f64;
        let ix = (center.0 + radius * t.cos()).round() as i64;
        let iy = (center.1 + radius * t.sin()).round() as i64;
        if ix < 0 || iy < 0 || ix >= g.nx as i64 || iy >= g.ny as i64 {
            return Err(Error::BadLoopPixel { ix, iy, reason: "outside the grid" });
        }
        match phase.get(ix as usize, iy as usize) {
            Some(p) => values.push(*p),
            None => return Err(Error::BadLoopPixel { ix, iy, reason: "masked" }),
        }
    }
    let mut total = CompensatedSum::new();
    for j in 0..n {
        total.add(wrap(values[(j + 1) % n] - values[j]));
    }
    let raw = total.value() / TAU;
    let winding = raw.round();
    Ok(Winding { winding: winding as i64, raw, residual: raw - winding, samples: n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `‖α·a − b‖ / ‖α·a‖`.
    pub l2_relative: f64,
    /// `max |α·a − b|` over all pixels and components.
    pub max_abs: f64,
    /// `α = ⟨a, b⟩/⟨a, a⟩` when aligned (so `b ≈ α·a`), otherwise 1.
    pub global_scale: C64,
}

/// Compares `b` against the reference `a`, optionally after fitting the
/// complex scale `α` that best maps `a` onto `b`.
pub fn compare<T: PixelValue>(a: &Field2D<T>, b: &Field2D<T>, align: bool) -> Result<ComparisonReport> {
    if !a.grid().same_shape(b.grid()) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.grid().nx,
            a.grid().ny,
            b.grid().nx,
            b.grid().ny
        )));
    }
    let pairs = || a.values().iter().zip(b.values()).flat_map(|(p, q)| p.parts().iter().zip(q.parts()));
    let alpha = if align {
        let mut ab = ComplexSum::new();
        let mut aa = CompensatedSum::new();
        for (x, y) in pairs() {
            ab.add(x.conj() * y);
            aa.add(x.norm_sqr());
        }
        if aa.value() > 0.0 {
            ab.value() / aa.value()
        } else {
            C64::new(1.0, 0.0)
        }
    } else {
        C64::new(1.0, 0.0)
    };
    let mut diff = CompensatedSum::new();
    let mut reference = CompensatedSum::new();
    let mut max_abs = 0.0f64;
    for (x, y) in pairs() {
        let ax = alpha * x;
        let d = (ax - y).norm();
        diff.add(d * d);
        reference.add(ax.norm_sqr());
        max_abs = max_abs.max(d);
    }
    let l2_relative = if reference.value() > 0.0 {
        (diff.value() / reference.value()).sqrt()
    } else if diff.value() == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ComparisonReport { l2_relative, max_abs, global_scale: alpha })
}
