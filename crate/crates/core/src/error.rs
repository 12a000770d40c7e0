use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("gamma matrix index {0} is outside 0..=3")]
    InvalidGammaIndex(usize),

    #[error("direction ({x}, {y}, {z}) is not a unit vector (|n| - 1 = {deviation:.3e})")]
    NotUnitVector { x: f64, y: f64, z: f64, deviation: f64 },

    #[error("points coincide (separation {0:.3e}); the kernel is singular there")]
    CoincidentPoints(f64),

    #[error("singular input: {0}")]
    Singular(&'static str),

    #[error("invalid particle state: {0}")]
    InvalidState(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("boundary sample {index} is missing its normal derivative")]
    MissingNormalDerivative { index: usize },

    #[error("boundary sample {index} has a degenerate weight {weight}")]
    DegenerateWeight { index: usize, weight: f64 },

    #[error("target is not enclosed by the surface (enclosed solid-angle fraction {fraction:.4})")]
    TargetOutside { fraction: f64 },

    #[error("target lies {distance:.3e} from sample {index}; closer than the guard distance {guard:.3e}")]
    TargetTooClose { index: usize, distance: f64, guard: f64 },

    #[error("phase loop sample at pixel ({ix}, {iy}) is {reason}")]
    BadLoopPixel { ix: i64, iy: i64, reason: &'static str },

    #[error("field file line {line} (byte offset {offset}): {message}")]
    Parse { line: usize, offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
