use thiserror::Error;

/// Errors produced across the ornament toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("linear part is not orthogonal (deviation {0:.3e})")]
    NonOrthogonal(f64),
    #[error("lattice is degenerate: basis vectors are linearly dependent")]
    DegenerateLattice,
    #[error("group {group} is incompatible with a {lattice} lattice")]
    IncompatibleLattice { group: String, lattice: String },
    #[error("unknown group '{0}'")]
    UnknownGroup(String),
    #[error("fundamental domain does not match the group's cell: {0}")]
    FdShapeMismatch(String),
    #[error("canvas {width}x{height} is smaller than one unit cell")]
    CanvasTooSmall { width: usize, height: usize },
    #[error("inconsistent color scheme: {0}")]
    InconsistentScheme(String),
    #[error("pattern sizes differ: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("transformed overlap covers only {0:.1}% of the canvas")]
    InsufficientOverlap(f64),
    #[error("no periodicity found: {0}")]
    NoPeriodicity(String),
    #[error("ambiguous classification: {}", .0.iter().map(|(g, s)| format!("{g} ({s:.4})")).collect::<Vec<_>>().join(", "))]
    AmbiguousClassification(Vec<(String, f64)>),
    #[error("no anchor of the required center class was found for {0}")]
    AnchorNotFound(String),
    #[error("unknown task '{0}'")]
    UnknownTask(String),
    #[error("option '{option}' is not part of task '{task}'")]
    UnknownOption { task: String, option: String },
    #[error("rankings cover different option sets")]
    MismatchedOptions,
    #[error("task '{0}' has no participants")]
    ZeroParticipants(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("perplexity {perplexity} exceeds (k-1)/3 = {limit:.3}")]
    PerplexityTooLarge { perplexity: f64, limit: f64 },
    #[error("embedding axis {0} has zero range")]
    DegenerateAxis(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<image::ImageError> for Error {
    fn from(e: image::ImageError) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}
