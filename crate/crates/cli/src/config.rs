//! Run configuration: a line-oriented `key = value` format with `[section]`
//! headers. See `docs/config.md` for the schema.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use kirchhoff_dirac::scalar::{DetectorMode, DetectorSpec, ObliquityKind, SourceSpec};
use kirchhoff_dirac::{DiracSpinor, Grid2D, ParticleState, Spin, Vec3, C64};

use crate::error::CliError;

const SCHEMA: &[(&str, &[&str])] = &[
    ("wave", &["k", "energy", "mass", "kappa"]),
    ("source", &["type", "position", "amplitude"]),
    (
        "aperture",
        &["kind", "grid", "nx", "ny", "extent", "radius", "width", "height", "separation", "charge", "period", "path"],
    ),
    ("propagation", &["method"]),
    ("detector", &["mode", "distance", "grid", "nx", "ny", "extent", "dx", "dy", "center"]),
    ("surface", &["radius", "n_theta", "n_phi", "center"]),
    ("spin", &["state", "spinor"]),
    ("output", &["field", "mask"]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed but untyped configuration.
#[derive(Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
}

fn config_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config { line: Some(line), message: message.into() }
}

fn missing(section: &str, key: &str) -> CliError {
    CliError::Config { line: None, message: format!("missing required key '{section}.{key}'") }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RawConfig::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| config_error(line, format!("malformed section header '{content}'")))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(config_error(line, format!("unknown section '[{name}]'")));
                }
                if let Some(first) = cfg.sections.insert(name.to_string(), line) {
                    return Err(config_error(line, format!("section '[{name}]' repeats line {first}")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config_error(line, format!("expected 'key = value', found '{content}'")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = &section else {
                return Err(config_error(line, format!("key '{key}' appears before any section header")));
            };
            let known = SCHEMA.iter().find(|(s, _)| s == sec).map(|(_, keys)| *keys).unwrap_or(&[]);
            if !known.contains(&key) {
                return Err(config_error(line, format!("unknown key '{sec}.{key}'")));
            }
            if value.is_empty() {
                return Err(config_error(line, format!("'{sec}.{key}' has an empty value")));
            }
            let slot = (sec.clone(), key.to_string());
            if let Some(prev) = cfg.entries.get(&slot) {
                return Err(config_error(line, format!("'{sec}.{key}' already set on line {}", prev.line)));
            }
            cfg.entries.insert(slot, Entry { value: value.to_string(), line });
        }
        Ok(cfg)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.entry(section, key).is_some()
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn str(&self, section: &str, key: &str) -> Result<(&str, usize), CliError> {
        self.entry(section, key).map(|e| (e.value.as_str(), e.line)).ok_or_else(|| missing(section, key))
    }

    fn opt<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| config_error(e.line, format!("'{section}.{key}': cannot parse '{}'", e.value))),
        }
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<T, CliError> {
        self.opt(section, key)?.ok_or_else(|| missing(section, key))
    }

    fn list(&self, section: &str, key: &str, len: usize) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        let parts: Result<Vec<f64>, _> = e.value.split(',').map(|p| p.trim().parse::<f64>()).collect();
        match parts {
            Ok(v) if v.len() == len => Ok(Some(v)),
            _ => Err(config_error(
                e.line,
                format!("'{section}.{key}' must be {len} comma-separated numbers, found '{}'", e.value),
            )),
        }
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.entry(section, key).map(|e| e.line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    HelmholtzKirchhoff,
    Scalar(ObliquityKind),
    Fraunhofer,
    SpinorKirchhoff,
    SpinorFraunhofer,
}

impl Method {
    pub fn is_spinor(self) -> bool {
        matches!(self, Method::SpinorKirchhoff | Method::SpinorFraunhofer)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::HelmholtzKirchhoff => "helmholtz-kirchhoff",
            Method::Scalar(ObliquityKind::Kirchhoff) => "kirchhoff",
            Method::Scalar(ObliquityKind::Rs1) => "rs1",
            Method::Scalar(ObliquityKind::Rs2) => "rs2",
            Method::Fraunhofer => "fraunhofer",
            Method::SpinorKirchhoff => "spinor-kirchhoff",
            Method::SpinorFraunhofer => "spinor-fraunhofer",
        }
    }
}

impl FromStr for Method {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "helmholtz-kirchhoff" => Method::HelmholtzKirchhoff,
            "kirchhoff" => Method::Scalar(ObliquityKind::Kirchhoff),
            "rs1" => Method::Scalar(ObliquityKind::Rs1),
            "rs2" => Method::Scalar(ObliquityKind::Rs2),
            "fraunhofer" => Method::Fraunhofer,
            "spinor-kirchhoff" => Method::SpinorKirchhoff,
            "spinor-fraunhofer" => Method::SpinorFraunhofer,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApertureKind {
    Circular,
    Slit,
    DoubleSlit,
    Fork,
}

impl FromStr for ApertureKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "circular" => ApertureKind::Circular,
            "slit" => ApertureKind::Slit,
            "double-slit" => ApertureKind::DoubleSlit,
            "fork" => ApertureKind::Fork,
            _ => return Err(()),
        })
    }
}

/// Generator parameters shared by the config file and the `aperture` flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureParams {
    pub kind: ApertureKind,
    pub nx: usize,
    pub ny: usize,
    pub extent: f64,
    pub radius: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub separation: Option<f64>,
    pub charge: i32,
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ApertureSource {
    Generated(ApertureParams),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    pub center: Vec3,
    pub radius: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinSpec {
    Eigen(Spin),
    Custom(DiracSpinor),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub k: f64,
    /// Particle state for spinor methods.
    pub state: Option<ParticleState>,
    pub source: SourceSpec,
    pub aperture: Option<ApertureSource>,
    pub method: Method,
    pub detector: DetectorSpec,
    pub surface: Option<SurfaceSpec>,
    pub spin: Option<SpinSpec>,
    pub output: PathBuf,
    pub mask_output: Option<PathBuf>,
}

fn complex(v: &[f64]) -> C64 {
    C64::new(v[0], v[1])
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let (method_str, method_line) = raw.str("propagation", "method")?;
        let method: Method = method_str.parse().map_err(|_| {
            config_error(
                method_line,
                format!("unknown method '{method_str}' (expected helmholtz-kirchhoff, kirchhoff, rs1, rs2, fraunhofer, spinor-kirchhoff or spinor-fraunhofer)"),
            )
        })?;

        let (k, state) = Self::wave(raw, method)?;
        let source = Self::source(raw)?;
        let spin = Self::spin(raw, method)?;

        let aperture = if method == Method::HelmholtzKirchhoff {
            if raw.has_section("aperture") {
                return Err(config_error(raw.sections["aperture"], "helmholtz-kirchhoff does not use an aperture"));
            }
            None
        } else {
            Some(Self::aperture(raw)?)
        };
        let surface = if method == Method::HelmholtzKirchhoff {
            let center = raw.list("surface", "center", 3)?.map_or(Vec3::zeros(), |v| Vec3::new(v[0], v[1], v[2]));
            Some(SurfaceSpec {
                center,
                radius: raw.get("surface", "radius")?,
                n_theta: raw.get("surface", "n_theta")?,
                n_phi: raw.get("surface", "n_phi")?,
            })
        } else {
            if raw.has_section("surface") {
                return Err(config_error(raw.sections["surface"], "[surface] is only used by helmholtz-kirchhoff"));
            }
            None
        };

        let detector = Self::detector(raw)?;
        let output = PathBuf::from(raw.str("output", "field")?.0);
        let mask_output = raw.entry("output", "mask").map(|e| PathBuf::from(&e.value));
        if mask_output.is_some() && aperture.is_none() {
            return Err(config_error(raw.line("output", "mask").unwrap_or(0), "output.mask needs an aperture"));
        }
        Ok(RunConfig { k, state, source, aperture, method, detector, surface, spin, output, mask_output })
    }

    /// `k` directly, or `k = √(E² − m²)` from `energy` and `mass`.
    fn wave(raw: &RawConfig, method: Method) -> Result<(f64, Option<ParticleState>), CliError> {
        let has_k = raw.has("wave", "k");
        let has_em = raw.has("wave", "energy") || raw.has("wave", "mass");
        let state = match (has_k, has_em) {
            (true, true) => {
                let line = raw.line("wave", "energy").or(raw.line("wave", "mass")).unwrap_or(0);
                return Err(config_error(line, "give either wave.k or wave.energy and wave.mass, not both"));
            }
            (false, false) => return Err(missing("wave", "k")),
            (true, false) => {
                let k: f64 = raw.get("wave", "k")?;
                let kappa: f64 = raw.opt("wave", "kappa")?.unwrap_or(1.0);
                ParticleState::from_wavenumber_kappa(k, kappa)
                    .map_err(|e| config_error(raw.line("wave", "k").unwrap_or(0), e.to_string()))?
            }
            (false, true) => {
                if raw.has("wave", "kappa") {
                    return Err(config_error(raw.line("wave", "kappa").unwrap_or(0), "wave.kappa follows from energy and mass"));
                }
                let energy: f64 = raw.get("wave", "energy")?;
                let mass: f64 = raw.get("wave", "mass")?;
                ParticleState::from_energy_mass(energy, mass)
                    .map_err(|e| config_error(raw.line("wave", "energy").unwrap_or(0), e.to_string()))?
            }
        };
        Ok((state.k(), method.is_spinor().then_some(state)))
    }

    fn source(raw: &RawConfig) -> Result<SourceSpec, CliError> {
        let amplitude = raw.list("source", "amplitude", 2)?.map_or(C64::new(1.0, 0.0), |v| complex(&v));
        let (kind, line) = raw.str("source", "type")?;
        match kind {
            "plane" => {
                if let Some(l) = raw.line("source", "position") {
                    return Err(config_error(l, "a plane-wave source has no position"));
                }
                Ok(SourceSpec::PlaneWave { amplitude })
            }
            "point" => {
                let p = raw.list("source", "position", 3)?.ok_or_else(|| missing("source", "position"))?;
                let spec = SourceSpec::PointSource { position: Vec3::new(p[0], p[1], p[2]), amplitude };
                spec.validate().map_err(|e| config_error(raw.line("source", "position").unwrap_or(line), e.to_string()))?;
                Ok(spec)
            }
            other => Err(config_error(line, format!("unknown source type '{other}' (expected plane or point)"))),
        }
    }

    fn spin(raw: &RawConfig, method: Method) -> Result<Option<SpinSpec>, CliError> {
        if !method.is_spinor() {
            if let Some(&line) = raw.sections.get("spin") {
                return Err(config_error(line, format!("method '{}' is scalar and does not take a [spin] section", method.name())));
            }
            return Ok(None);
        }
        let (state, line) = raw.str("spin", "state")?;
        let spec = match state {
            "up" => SpinSpec::Eigen(Spin::Up),
            "down" => SpinSpec::Eigen(Spin::Down),
            "custom" => {
                let v = raw.list("spin", "spinor", 8)?.ok_or_else(|| missing("spin", "spinor"))?;
                SpinSpec::Custom(DiracSpinor::new([complex(&v[0..2]), complex(&v[2..4]), complex(&v[4..6]), complex(&v[6..8])]))
            }
            other => return Err(config_error(line, format!("unknown spin state '{other}' (expected up, down or custom)"))),
        };
        if !matches!(spec, SpinSpec::Custom(_)) {
            if let Some(l) = raw.line("spin", "spinor") {
                return Err(config_error(l, "spin.spinor is only used with state = custom"));
            }
        }
        Ok(Some(spec))
    }

    fn aperture(raw: &RawConfig) -> Result<ApertureSource, CliError> {
        let (kind, line) = raw.str("aperture", "kind")?;
        if kind == "file" {
            return Ok(ApertureSource::File(PathBuf::from(raw.str("aperture", "path")?.0)));
        }
        let kind: ApertureKind = kind.parse().map_err(|_| {
            config_error(line, format!("unknown aperture kind '{kind}' (expected circular, slit, double-slit, fork or file)"))
        })?;
        let (nx, ny) = grid_size(raw, "aperture")?;
        Ok(ApertureSource::Generated(ApertureParams {
            kind,
            nx,
            ny,
            extent: raw.get("aperture", "extent")?,
            radius: raw.opt("aperture", "radius")?,
            width: raw.opt("aperture", "width")?,
            height: raw.opt("aperture", "height")?,
            separation: raw.opt("aperture", "separation")?,
            charge: raw.opt("aperture", "charge")?.unwrap_or(1),
            period: raw.opt("aperture", "period")?,
        }))
    }

    fn detector(raw: &RawConfig) -> Result<DetectorSpec, CliError> {
        let (mode, line) = raw.str("detector", "mode")?;
        let mode = match mode {
            "real" => DetectorMode::RealPlane,
            "angular" => DetectorMode::Angular,
            other => return Err(config_error(line, format!("unknown detector mode '{other}' (expected real or angular)"))),
        };
        let distance: f64 = raw.get("detector", "distance")?;
        let (nx, ny) = grid_size(raw, "detector")?;
        let (dx, dy) = match (raw.opt::<f64>("detector", "extent")?, raw.opt("detector", "dx")?, raw.opt("detector", "dy")?) {
            (Some(e), None, None) => (e / nx as f64, e / ny as f64),
            (None, Some(dx), dy) => (dx, dy.unwrap_or(dx)),
            (None, None, _) => return Err(missing("detector", "extent")),
            (Some(_), _, _) => {
                return Err(config_error(raw.line("detector", "extent").unwrap_or(0), "give either detector.extent or detector.dx/dy"))
            }
        };
        let center = raw.list("detector", "center", 2)?.map_or([0.0, 0.0], |v| [v[0], v[1]]);
        let grid = Grid2D::around(nx, ny, dx, dy, center).map_err(|e| config_error(line, e.to_string()))?;
        DetectorSpec::new(distance, grid, mode).map_err(|e| config_error(raw.line("detector", "distance").unwrap_or(line), e.to_string()))
    }
}

/// `grid = n` for a square grid, or `nx`/`ny`.
fn grid_size(raw: &RawConfig, section: &str) -> Result<(usize, usize), CliError> {
    match (raw.opt::<usize>(section, "grid")?, raw.opt::<usize>(section, "nx")?, raw.opt::<usize>(section, "ny")?) {
        (Some(n), None, None) => Ok((n, n)),
        (None, Some(nx), Some(ny)) => Ok((nx, ny)),
        (None, Some(_), None) => Err(missing(section, "ny")),
        (None, None, Some(_)) => Err(missing(section, "nx")),
        (None, None, None) => Err(missing(section, "grid")),
        (Some(_), _, _) => Err(config_error(raw.line(section, "grid").unwrap_or(0), format!("give either {section}.grid or {section}.nx/ny"))),
    }
}
