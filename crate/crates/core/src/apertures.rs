//! Binary aperture masks sampled at pixel centres, and mask file I/O.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fgrid::{FieldData, FieldFile};
use crate::grid::{Grid2D, RealGrid, ScalarField2D};
use crate::C64;

/// Real transmission grid with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureMask(RealGrid);

impl ApertureMask {
    pub fn new(field: RealGrid) -> Result<Self> {
        if let Some(i) = field.values().iter().position(|v| !(0.0..=1.0).contains(v)) {
            let g = field.grid();
            return Err(Error::InvalidParameter(format!(
                "transmission {} at pixel ({}, {}) is outside [0, 1]",
                field.values()[i],
                i % g.nx,
                i / g.nx
            )));
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &RealGrid {
        &self.0
    }

    pub fn grid(&self) -> &Grid2D {
        self.0.grid()
    }

    pub fn open_count(&self) -> usize {
        self.0.values().iter().filter(|&&v| v > 0.0).count()
    }

    /// Mean transmission over the grid.
    pub fn open_fraction(&self) -> f64 {
        crate::sum::sum_f64(self.0.values()) / self.0.values().len() as f64
    }

    pub fn to_scalar(&self) -> ScalarField2D {
        self.0.map(|&v| C64::new(v, 0.0))
    }
}

fn binary(grid: &Grid2D, what: &str, open: impl Fn(f64, f64) -> bool) -> Result<ApertureMask> {
    let mask = RealGrid::from_fn(*grid, |x, y| if open(x, y) { 1.0 } else { 0.0 });
    if mask.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Geometry(format!("{what} has no open pixel on this grid")));
    }
    Ok(ApertureMask(mask))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn fits(name: &str, half: f64, limit: f64) -> Result<()> {
    if half <= limit * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{name} reaches {half}, beyond the grid half-extent {limit}")))
    }
}

/// Disc `X² + Y² ≤ r²`.
pub fn circular(radius: f64, grid: &Grid2D) -> Result<ApertureMask> {
    positive("radius", radius)?;
    let (hx, hy) = grid.half_extent();
    fits("radius", radius, hx.min(hy))?;
    let r2 = radius * radius;
    binary(grid, "circular aperture", |x, y| x * x + y * y <= r2)
}

/// Centred rectangle `|X| ≤ w/2, |Y| ≤ h/2`.
pub fn slit(width: f64, height: f64, grid: &Grid2D) -> Result<ApertureMask> {
    positive("width", width)?;
    positive("height", height)?;
    let (hx, hy) = grid.half_extent();
    fits("slit width", width / 2.0, hx)?;
    fits("slit height", height / 2.0, hy)?;
    binary(grid, "slit", |x, y| x.abs() <= width / 2.0 && y.abs() <= height / 2.0)
}

/// Two slits of the given width with centres at `X = ±separation/2`.
pub fn double_slit(width: f64, separation: f64, height: f64, grid: &Grid2D) -> Result<ApertureMask> {
    positive("width", width)?;
    positive("separation", separation)?;
    positive("height", height)?;
    if separation <= width {
        return Err(Error::Geometry(format!("slits of width {width} at separation {separation} overlap")));
    }
    let (hx, hy) = grid.half_extent();
    fits("double slit", (separation + width) / 2.0, hx)?;
    fits("slit height", height / 2.0, hy)?;
    let half_sep = separation / 2.0;
    binary(grid, "double slit", |x, y| (x.abs() - half_sep).abs() <= width / 2.0 && y.abs() <= height / 2.0)
}

/// Fork grating: open where `cos(2πX/Λ + ℓ·atan2(Y, X)) > 0` inside the
/// radius.
pub fn fork_hologram(charge: i32, period: f64, radius: f64, grid: &Grid2D) -> Result<ApertureMask> {
    positive("grating period", period)?;
    positive("radius", radius)?;
    let pixel = grid.dx.max(grid.dy);
    if period <= 2.0 * pixel {
        return Err(Error::Geometry(format!(
            "grating period {period} is not resolvable with pixel size {pixel}; it must exceed two pixels"
        )));
    }
    let (hx, hy) = grid.half_extent();
    fits("radius", radius, hx.min(hy))?;
    let r2 = radius * radius;
    let l = charge as f64;
    binary(grid, "fork hologram", |x, y| {
        x * x + y * y <= r2 && (TAU * x / period + l * y.atan2(x)).cos() > 0.0
    })
}

/// Writes the mask as a one-component field file with `k = 0`.
pub fn save_mask(mask: &ApertureMask, path: impl AsRef<Path>) -> Result<()> {
    FieldFile::scalar(mask.to_scalar(), 0.0).write(path)
}

pub fn parse_mask(text: &str) -> Result<ApertureMask> {
    let (file, rows) = FieldFile::parse_located(text)?;
    let FieldData::Scalar(field) = file.data else {
        let (line, offset) = rows[0];
        return Err(Error::Parse { line, offset, message: "a mask must have exactly one component".into() });
    };
    for (v, &(line, offset)) in field.values().iter().zip(&rows) {
        if v.im != 0.0 {
            return Err(Error::Parse { line, offset, message: format!("mask value has nonzero imaginary part {}", v.im) });
        }
        if !(0.0..=1.0).contains(&v.re) {
            return Err(Error::Parse { line, offset, message: format!("transmission {} is outside [0, 1]", v.re) });
        }
    }
    ApertureMask::new(field.map(|v| v.re))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<ApertureMask> {
    parse_mask(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn centered(n: usize, extent: f64) -> Grid2D {
        Grid2D::centered(n, extent).unwrap()
    }

    fn is_binary(m: &ApertureMask) -> bool {
        m.field().values().iter().all(|&v| v == 0.0 || v == 1.0)
    }

    #[test]
    fn circular_area_count() {
        let g = centered(512, 4.0);
        let r = 2.0 * 0.5;
        let m = circular(r, &g).unwrap();
        let expect = PI * r * r / g.cell_area();
        assert!((m.open_count() as f64 - expect).abs() / expect < 0.01);
        assert!(is_binary(&m));
    }

    #[test]
    fn tiny_radius_opens_center_pixel_only() {
        let g = centered(9, 9.0);
        let m = circular(0.3, &g).unwrap();
        assert_eq!(m.open_count(), 1);
        assert_eq!(*m.field().get(4, 4), 1.0);
    }

    #[test]
    fn circular_is_mirror_symmetric() {
        let g = centered(64, 3.0);
        let m = circular(1.1, &g).unwrap();
        for iy in 0..64 {
            for ix in 0..64 {
                let v = m.field().get(ix, iy);
                assert_eq!(v, m.field().get(63 - ix, iy));
                assert_eq!(v, m.field().get(ix, 63 - iy));
            }
        }
    }

    #[test]
    fn oversized_and_empty_apertures_rejected() {
        let g = centered(32, 2.0);
        assert!(circular(1.5, &g).is_err());
        assert!(slit(0.0, 1.0, &g).is_err());
        assert!(slit(3.0, 1.0, &g).is_err());
        assert!(circular(0.01, &g).is_err());
    }

    #[test]
    fn double_slit_geometry() {
        let g = centered(64, 4.0);
        let m = double_slit(0.5, 1.5, 2.0, &g).unwrap();
        assert!(is_binary(&m));
        let row = 32;
        let open: Vec<f64> = (0..64).filter(|&i| *m.field().get(i, row) == 1.0).map(|i| g.x(i)).collect();
        assert!(open.iter().all(|x| (x.abs() - 0.75).abs() <= 0.25));
        assert_eq!(open.len(), 16);
        assert!(double_slit(0.5, 0.5, 1.0, &g).is_err());
        assert!(double_slit(0.5, 0.4, 1.0, &g).is_err());
    }

    #[test]
    fn fork_without_charge_is_straight_grating() {
        let g = centered(128, 4.0);
        let m = fork_hologram(0, 0.25, 1.5, &g).unwrap();
        assert!(is_binary(&m));
        for ix in 0..128 {
            for iy in 0..128 {
                let (x, y) = (g.x(ix), g.y(iy));
                if x * x + y * y <= 2.0 {
                    assert_eq!(m.field().get(ix, iy), m.field().get(ix, 64));
                }
            }
        }
    }

    fn rising_edges(m: &ApertureMask, iy: usize) -> usize {
        let row: Vec<f64> = (0..m.grid().nx).map(|ix| *m.field().get(ix, iy)).collect();
        row.windows(2).filter(|w| w[0] == 0.0 && w[1] == 1.0).count()
    }

    #[test]
    fn fork_has_one_extra_fringe_below_the_dislocation() {
        let g = centered(256, 4.0);
        let m = fork_hologram(1, 0.25, 2.0, &g).unwrap();
        let (upper, lower) = (128 + 20, 127 - 20);
        assert_eq!(g.y(upper), -g.y(lower));
        let diff = rising_edges(&m, lower) as i64 - rising_edges(&m, upper) as i64;
        assert_eq!(diff.abs(), 1);
        let plain = fork_hologram(0, 0.25, 2.0, &g).unwrap();
        assert_eq!(rising_edges(&plain, lower), rising_edges(&plain, upper));
    }

    #[test]
    fn fork_rotation_gives_complement_of_mirror() {
        let n = 128;
        let g = centered(n, 4.0);
        let m = fork_hologram(1, 0.25, 1.9, &g).unwrap();
        let mut checked = 0;
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = (g.x(ix), g.y(iy));
                let phase = TAU * x / 0.25 - y.atan2(x);
                if x * x + y * y > 1.9 * 1.9 - 1e-9 || phase.cos().abs() < 1e-9 {
                    continue;
                }
                let rotated = *m.field().get(n - 1 - ix, n - 1 - iy);
                let mirrored = *m.field().get(ix, n - 1 - iy);
                assert_eq!(rotated, 1.0 - mirrored);
                checked += 1;
            }
        }
        assert!(checked > 10_000);
    }

    #[test]
    fn negative_charge_is_mirror_image() {
        let n = 96;
        let g = centered(n, 3.0);
        let plus = fork_hologram(2, 0.2, 1.4, &g).unwrap();
        let minus = fork_hologram(-2, 0.2, 1.4, &g).unwrap();
        for iy in 0..n {
            for ix in 0..n {
                assert_eq!(minus.field().get(ix, iy), plus.field().get(ix, n - 1 - iy));
            }
        }
    }

    #[test]
    fn unresolvable_period_rejected() {
        let g = centered(64, 4.0);
        assert!(fork_hologram(1, 0.1, 1.0, &g).is_err());
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.fgrid");
        let m = fork_hologram(1, 0.25, 1.5, &centered(64, 4.0)).unwrap();
        save_mask(&m, &path).unwrap();
        assert_eq!(load_mask(&path).unwrap(), m);
    }

    #[test]
    fn out_of_range_value_reports_its_row() {
        let m = slit(1.0, 1.0, &centered(4, 4.0)).unwrap();
        let text = FieldFile::scalar(m.to_scalar(), 0.0).to_text();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[10] = "1.5 0".into();
        let bad = lines.join("\n") + "\n";
        match parse_mask(&bad) {
            Err(Error::Parse { line, offset, .. }) => {
                assert_eq!(line, 11);
                assert_eq!(offset, lines[..10].iter().map(|l| l.len() + 1).sum::<usize>());
            }
            other => panic!("{other:?}"),
        }
        lines[10] = "0 0.5".into();
        assert!(matches!(parse_mask(&(lines.join("\n") + "\n")), Err(Error::Parse { line: 11, .. })));
    }
}
