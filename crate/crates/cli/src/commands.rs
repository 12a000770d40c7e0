use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kirchhoff_dirac::algebra::{plane_wave_spinor, PlaneWave, ScalarWave, SphericalWave};
use kirchhoff_dirac::analysis::{compare, intensity, phase, spin_density, winding_number, ComparisonReport, MaskedGrid};
use kirchhoff_dirac::apertures::{self, circular, double_slit, fork_hologram, slit, ApertureMask};
use kirchhoff_dirac::fgrid::{FieldData, FieldFile};
use kirchhoff_dirac::scalar::{
    fraunhofer_scalar, helmholtz_kirchhoff_integral, illuminate, kirchhoff_fresnel, sample_scalar_wave,
    sphere_quadrature, SourceSpec,
};
use kirchhoff_dirac::spinor::{spinor_fraunhofer, spinor_kirchhoff_fresnel};
use kirchhoff_dirac::{Direction3, Field2D, Grid2D, RealGrid, ScalarField2D, SpinorField2D, C64};
use log::info;

use crate::config::{ApertureKind, ApertureParams, ApertureSource, Method, RunConfig, SpinSpec};
use crate::error::{CliError, Context};

/// Default fork grating period in pixels.
pub const FORK_PERIOD_PIXELS: f64 = 16.0;

fn required(value: Option<f64>, name: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("aperture kind needs '{name}'")))
}

pub fn build_aperture(p: &ApertureParams) -> Result<ApertureMask, CliError> {
    let extent_y = p.extent * p.ny as f64 / p.nx as f64;
    let grid = Grid2D::centered_rect(p.nx, p.ny, p.extent, extent_y).map_err(|e| CliError::Usage(e.to_string()))?;
    let height = p.height.unwrap_or(extent_y);
    let mask = match p.kind {
        ApertureKind::Circular => circular(required(p.radius, "radius")?, &grid),
        ApertureKind::Slit => slit(required(p.width, "width")?, height, &grid),
        ApertureKind::DoubleSlit => {
            double_slit(required(p.width, "width")?, required(p.separation, "separation")?, height, &grid)
        }
        ApertureKind::Fork => {
            let period = p.period.unwrap_or(FORK_PERIOD_PIXELS * grid.dx);
            let radius = p.radius.unwrap_or(p.extent.min(extent_y) / 2.0);
            fork_hologram(p.charge, period, radius, &grid)
        }
    };
    mask.map_err(|e| CliError::Usage(format!("aperture: {e}")))
}

pub fn cmd_aperture(params: &ApertureParams, output: &Path) -> Result<(), CliError> {
    let mask = build_aperture(params)?;
    apertures::save_mask(&mask, output).context(|| format!("writing {}", output.display()))?;
    let g = mask.grid();
    println!("kind={:?}", params.kind);
    println!("nx={}", g.nx);
    println!("ny={}", g.ny);
    println!("open_pixels={}", mask.open_count());
    println!("open_fraction={:.12}", mask.open_fraction());
    println!("output={}", output.display());
    Ok(())
}

fn load_aperture(source: &ApertureSource) -> Result<ApertureMask, CliError> {
    match source {
        ApertureSource::Generated(p) => build_aperture(p).map_err(|e| CliError::Config { line: None, message: e.to_string() }),
        ApertureSource::File(path) => apertures::load_mask(path).context(|| format!("reading mask {}", path.display())),
    }
}

fn helmholtz_kirchhoff(cfg: &RunConfig) -> Result<ScalarField2D, CliError> {
    let surface = cfg.surface.expect("helmholtz-kirchhoff config carries a surface");
    let wave: Box<dyn ScalarWave> = match cfg.source {
        SourceSpec::PlaneWave { amplitude } => Box::new(PlaneWave { k: cfg.k, direction: Direction3::z(), amplitude }),
        SourceSpec::PointSource { position, amplitude } => {
            if (position - surface.center).norm() <= surface.radius {
                return Err(CliError::Config {
                    line: None,
                    message: "the point source must lie outside the integration sphere".into(),
                });
            }
            Box::new(SphericalWave { k: cfg.k, center: position, amplitude })
        }
    };
    let nodes = sphere_quadrature(&surface.center, surface.radius, surface.n_theta, surface.n_phi)
        .map_err(|e| CliError::Config { line: None, message: format!("surface: {e}") })?;
    let boundary = sample_scalar_wave(&nodes, wave.as_ref());
    let points = cfg.detector.points(cfg.k).context(|| "detector".into())?;
    let values = points
        .iter()
        .map(|p| helmholtz_kirchhoff_integral(&boundary, p, cfg.k))
        .collect::<kirchhoff_dirac::Result<Vec<_>>>()
        .context(|| "surface integral".into())?;
    let mut worst = 0.0f64;
    for (p, v) in points.iter().zip(&values) {
        worst = worst.max((wave.value(p) - v).norm());
    }
    println!("max_abs_error={worst:.6e}");
    ScalarField2D::new(cfg.detector.grid, values).context(|| "assembling output".into())
}

fn spinor_aperture(cfg: &RunConfig, profile: &ScalarField2D) -> Result<SpinorField2D, CliError> {
    let spinor = match cfg.spin.expect("spinor methods carry a spin") {
        SpinSpec::Custom(s) => s,
        SpinSpec::Eigen(spin) => {
            let state = cfg.state.expect("spinor methods carry a particle state");
            plane_wave_spinor(&state, &Direction3::z(), spin).context(|| "building the spinor".into())?
        }
    };
    Ok(SpinorField2D::from_profile(profile, &spinor))
}

/// Runs one propagation and returns the field file, without writing it.
pub fn propagate(cfg: &RunConfig) -> Result<FieldFile, CliError> {
    let (k, det) = (cfg.k, &cfg.detector);
    let mask = cfg.aperture.as_ref().map(load_aperture).transpose()?;
    if let (Some(m), Some(path)) = (&mask, &cfg.mask_output) {
        apertures::save_mask(m, path).context(|| format!("writing {}", path.display()))?;
    }
    let run = || format!("{} propagation", cfg.method.name());
    let data = match cfg.method {
        Method::HelmholtzKirchhoff => FieldData::Scalar(helmholtz_kirchhoff(cfg)?),
        Method::Scalar(kind) => {
            let transmission = mask.as_ref().unwrap().to_scalar();
            FieldData::Scalar(kirchhoff_fresnel(&transmission, &cfg.source, det, k, kind).context(run)?)
        }
        Method::Fraunhofer => {
            let field = illuminate(mask.as_ref().unwrap(), &cfg.source, k).context(run)?;
            FieldData::Scalar(fraunhofer_scalar(&field, k, det).context(run)?)
        }
        Method::SpinorKirchhoff => {
            let aperture = spinor_aperture(cfg, &mask.as_ref().unwrap().to_scalar())?;
            FieldData::Spinor(spinor_kirchhoff_fresnel(&aperture, &cfg.source, det, k).context(run)?)
        }
        Method::SpinorFraunhofer => {
            let field = illuminate(mask.as_ref().unwrap(), &cfg.source, k).context(run)?;
            let aperture = spinor_aperture(cfg, &field)?;
            FieldData::Spinor(spinor_fraunhofer(&aperture, k, det).context(run)?)
        }
    };
    Ok(FieldFile { k, data })
}

fn power_grid(file: &FieldFile) -> RealGrid {
    match &file.data {
        FieldData::Scalar(f) => intensity(f),
        FieldData::Spinor(f) => intensity(f),
    }
}

fn peak(p: &RealGrid) -> (usize, f64) {
    p.values().iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

pub fn cmd_propagate(config_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", config_path.display())))?;
    let cfg = RunConfig::parse(&text)?;
    info!("running {} at k = {}", cfg.method.name(), cfg.k);
    let start = Instant::now();
    let file = propagate(&cfg)?;
    let elapsed = start.elapsed();
    file.write(&cfg.output).context(|| format!("writing {}", cfg.output.display()))?;

    let p = power_grid(&file);
    let (i, value) = peak(&p);
    let g = p.grid();
    let total: f64 = p.values().iter().sum();
    println!("method={}", cfg.method.name());
    println!("k={}", cfg.k);
    println!("components={}", file.components());
    println!("total_power={:.12e}", total * g.cell_area());
    println!("peak_ix={}", i % g.nx);
    println!("peak_iy={}", i / g.nx);
    println!("peak_x={}", g.coords(i).0);
    println!("peak_y={}", g.coords(i).1);
    println!("peak_intensity={value:.12e}");
    println!("runtime_s={:.3}", elapsed.as_secs_f64());
    println!("output={}", cfg.output.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Intensity,
    Phase,
    Spin,
    Winding,
    Compare,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub analysis: Analysis,
    pub output: Option<PathBuf>,
    pub center: Option<(f64, f64)>,
    pub radius: f64,
    pub with: Vec<PathBuf>,
    pub align: bool,
    pub component: usize,
}

fn read_field(path: &Path) -> Result<FieldFile, CliError> {
    FieldFile::read(path).context(|| format!("reading {}", path.display()))
}

fn component(file: &FieldFile, c: usize) -> Result<ScalarField2D, CliError> {
    match (&file.data, c) {
        (FieldData::Scalar(f), 0) => Ok(f.clone()),
        (FieldData::Spinor(f), 0..=3) => Ok(f.component(c)),
        _ => Err(CliError::Usage(format!("component {c} does not exist in a {}-component file", file.components()))),
    }
}

fn masked_to_field(g: &MaskedGrid) -> ScalarField2D {
    g.map(|v| C64::new(v.unwrap_or(f64::NAN), 0.0))
}

fn write_derived(output: &Option<PathBuf>, field: ScalarField2D) -> Result<(), CliError> {
    if let Some(path) = output {
        FieldFile::scalar(field, 0.0).write(path).context(|| format!("writing {}", path.display()))?;
        println!("output={}", path.display());
    }
    Ok(())
}

fn masked_stats(g: &MaskedGrid) -> (usize, f64, f64, f64) {
    let lit: Vec<f64> = g.values().iter().flatten().copied().collect();
    let mean = lit.iter().sum::<f64>() / lit.len().max(1) as f64;
    let min = lit.iter().copied().fold(f64::INFINITY, f64::min);
    let max = lit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lit.len(), mean, min, max)
}

/// Pixelwise mean of several files of the same shape.
fn average(files: &[FieldFile]) -> Result<FieldFile, CliError> {
    let first = &files[0];
    for f in &files[1..] {
        if f.components() != first.components() || !f.grid().same_shape(first.grid()) {
            return Err(CliError::Usage("--with files differ in shape or component count".into()));
        }
    }
    let scale = C64::new(1.0 / files.len() as f64, 0.0);
    let data = match &first.data {
        FieldData::Scalar(a) => {
            let mut values = a.values().to_vec();
            for f in &files[1..] {
                let FieldData::Scalar(b) = &f.data else { unreachable!() };
                values.iter_mut().zip(b.values()).for_each(|(x, y)| *x += y);
            }
            FieldData::Scalar(Field2D::new(*a.grid(), values.into_iter().map(|v| v * scale).collect()).unwrap())
        }
        FieldData::Spinor(a) => {
            let mut values = a.values().to_vec();
            for f in &files[1..] {
                let FieldData::Spinor(b) = &f.data else { unreachable!() };
                values.iter_mut().zip(b.values()).for_each(|(x, y)| *x = *x + *y);
            }
            FieldData::Spinor(Field2D::new(*a.grid(), values.into_iter().map(|v| v.scale(scale)).collect()).unwrap())
        }
    };
    Ok(FieldFile { k: first.k, data })
}

fn compare_files(a: &FieldFile, b: &FieldFile, align: bool) -> Result<ComparisonReport, CliError> {
    let report = match (&a.data, &b.data) {
        (FieldData::Scalar(x), FieldData::Scalar(y)) => compare(x, y, align),
        (FieldData::Spinor(x), FieldData::Spinor(y)) => compare(x, y, align),
        _ => return Err(CliError::Usage("cannot compare a scalar file with a spinor file".into())),
    };
    report.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_analyze(input: &Path, opts: &AnalyzeOptions) -> Result<(), CliError> {
    let file = read_field(input)?;
    match opts.analysis {
        Analysis::Intensity => {
            let p = power_grid(&file);
            let (i, value) = peak(&p);
            let g = *p.grid();
            println!("total_power={:.12e}", p.values().iter().sum::<f64>() * g.cell_area());
            println!("peak_ix={}", i % g.nx);
            println!("peak_iy={}", i / g.nx);
            println!("peak_intensity={value:.12e}");
            write_derived(&opts.output, p.map(|v| C64::new(*v, 0.0)))?;
        }
        Analysis::Phase => {
            let ph = phase(&component(&file, opts.component)?);
            let (lit, _, min, max) = masked_stats(&ph);
            println!("component={}", opts.component);
            println!("masked_pixels={}", ph.grid().len() - lit);
            println!("min_phase={min:.12}");
            println!("max_phase={max:.12}");
            write_derived(&opts.output, masked_to_field(&ph))?;
        }
        Analysis::Spin => {
            let FieldData::Spinor(f) = &file.data else {
                return Err(CliError::Usage(format!(
                    "spin analysis needs a 4-component file; {} has {}",
                    input.display(),
                    file.components()
                )));
            };
            let s = spin_density(f);
            let (lit, mean, min, max) = masked_stats(&s);
            println!("lit_pixels={lit}");
            println!("mean_spin={mean:.15}");
            println!("min_spin={min:.15}");
            println!("max_spin={max:.15}");
            write_derived(&opts.output, masked_to_field(&s))?;
        }
        Analysis::Winding => {
            let g = *file.grid();
            let center = opts.center.unwrap_or(((g.nx as f64 - 1.0) / 2.0, (g.ny as f64 - 1.0) / 2.0));
            let ph = phase(&component(&file, opts.component)?);
            let w = winding_number(&ph, center, opts.radius).map_err(|e| CliError::Usage(e.to_string()))?;
            println!("component={}", opts.component);
            println!("center={},{}", center.0, center.1);
            println!("radius={}", opts.radius);
            println!("winding={}", w.winding);
            println!("raw={:.12}", w.raw);
            println!("residual={:.3e}", w.residual);
            println!("samples={}", w.samples);
        }
        Analysis::Compare => {
            if opts.with.is_empty() {
                return Err(CliError::Usage("compare needs at least one --with file".into()));
            }
            let others = opts.with.iter().map(|p| read_field(p)).collect::<Result<Vec<_>, _>>()?;
            let target = average(&others)?;
            let r = compare_files(&file, &target, opts.align)?;
            println!("references={}", others.len());
            println!("l2_relative={:.6e}", r.l2_relative);
            println!("max_abs={:.6e}", r.max_abs);
            println!("scale_re={:.15}", r.global_scale.re);
            println!("scale_im={:.15}", r.global_scale.im);
        }
    }
    Ok(())
}
