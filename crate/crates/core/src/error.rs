use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("edges meeting at vertex {vertex} are anti-parallel (polygon doubles back)")]
    AntiParallelEdges { vertex: usize },

    #[error("polygon is not embedded (minimum non-adjacent edge distance {distance:e})")]
    NotEmbedded { distance: f64 },

    #[error("tube radius {radius} is not below MinRad {minrad}")]
    RadiusExceedsMinRad { radius: f64, minrad: f64 },

    #[error("polygon is not equilateral (relative edge deviation {deviation:e})")]
    NotEquilateral { deviation: f64 },

    #[error("degenerate projection: {0}")]
    DegenerateProjection(&'static str),

    #[error("no generic projection found after {attempts} attempts")]
    ProjectionFailure { attempts: usize },

    #[error("diagrams disagree across projection directions")]
    ProjectionMismatch,

    #[error("diagram has {count} crossings, above the cap of {cap}")]
    TooManyCrossings { count: usize, cap: usize },

    #[error("skein expansion of a {crossings}-crossing diagram exceeded {nodes} nodes")]
    SkeinBudget { crossings: usize, nodes: usize },

    #[error("fit diverged: residual not reduced after full damping ladder")]
    FitDiverged,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("series is not strictly monotone in probability")]
    NonMonotoneSeries,

    #[error("all x values coincide")]
    DegenerateX,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
