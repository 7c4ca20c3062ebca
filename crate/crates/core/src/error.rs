use thiserror::Error;

/// Errors raised by the geometry kernels and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("non-finite value in field `{field}` at grid point ({i}, {j})")]
    NonFinite { field: String, i: usize, j: usize },

    #[error("matrix too far from O1(5) to reorthonormalize (defect {defect:.3e})")]
    NotNearGroup { defect: f64 },

    #[error("reorthonormalization stalled after {iterations} iterations (defect {defect:.3e})")]
    ReorthonormalizationStalled { iterations: usize, defect: f64 },

    #[error("integration step at ({i}, {j}) has exponent norm {norm:.3e} > {limit}; grid too coarse")]
    StepTooLarge { i: usize, j: usize, norm: f64, limit: f64 },

    #[error("gauge at ({i}, {j}) is not block diagonal in O(3) x O1(2)")]
    GaugeStructure { i: usize, j: usize },

    #[error("frame at ({i}, {j}) does not have the block form diag(H3, I2)")]
    FrameStructure { i: usize, j: usize },

    #[error("triple invariant {what} violated at ({i}, {j}): |error| = {value:.3e}")]
    TripleInvariant { what: &'static str, i: usize, j: usize, value: f64 },

    #[error("closedness defect {value:.3e} of the integrated 1-form exceeds {threshold:.3e}")]
    NotClosed { value: f64, threshold: f64 },

    #[error("conformal factor {value:.3e} at ({i}, {j}) does not match the surface metric")]
    MetricMismatch { i: usize, j: usize, value: f64 },

    #[error("point ({i}, {j}) is at infinity in this chart (<v, inf> = {value:.3e})")]
    ChartSingularity { i: usize, j: usize, value: f64 },

    #[error("coordinate tangents are parallel at ({i}, {j}); the surface is singular there")]
    DegenerateTangents { i: usize, j: usize },

    #[error("chart centre is not light-like (<q, q> = {0:.3e})")]
    NotLightLike(f64),

    #[error("meridian integration failed near x = {x}: turning angle varies too fast for the grid")]
    MeridianStepSize { x: f64 },

    #[error("|k| = {value:.3e} below floor {floor:.1e} at ({i}, {j})")]
    KBelowFloor { i: usize, j: usize, value: f64, floor: f64 },

    #[error("Calapso residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    CalapsoResidual { residual: f64, threshold: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
