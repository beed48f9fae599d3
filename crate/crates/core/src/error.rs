use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters for family `{family}`: {reason}")]
    InvalidFamilyParams { family: String, reason: String },

    #[error("unsupported dimension N={dim} for {context}")]
    UnsupportedDimension { dim: usize, context: String },

    #[error("degenerate boundary at {point:?}: |grad phi| = {grad_norm:.3e}")]
    DegenerateBoundary { point: [f64; 3], grad_norm: f64 },

    #[error("curvature singularity at {point:?}: |grad phi| = {grad_norm:.3e}")]
    CurvatureSingularity { point: [f64; 3], grad_norm: f64 },

    #[error("point {point:?} is not on the boundary (|phi| = {phi:.3e} > h = {h:.3e})")]
    OffBoundary { point: [f64; 3], phi: f64, h: f64 },

    #[error("geometry unresolved: narrowest feature {feature_width:.4} spans fewer than 8 cells of size {h:.4}")]
    UnresolvedGeometry { feature_width: f64, h: f64 },

    #[error("linear solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("bound violated: {inequality} (slack {slack:.3e}, worst point {point:?})")]
    BoundViolated { inequality: String, slack: f64, point: Option<[f64; 3]> },

    #[error("inequality violated beyond tolerance: {inequality} (slack {slack:.3e}, tolerance {tolerance:.3e})")]
    InequalityViolated { inequality: String, slack: f64, tolerance: f64 },

    #[error("reference point {z:?} lies outside the domain")]
    ZOutsideDomain { z: [f64; 3] },

    #[error("empty sublevel set: 2*epsilon = {two_eps:.4e} >= max(-u) = {max_neg_u:.4e}")]
    EmptySublevel { two_eps: f64, max_neg_u: f64 },

    #[error("ball {ball} is not contained in the domain (protrudes by {depth:.3e})")]
    ContainmentViolation { ball: usize, depth: f64 },

    #[error("balls {i} and {j} overlap by {depth:.3e}")]
    OverlapViolation { i: usize, j: usize, depth: f64 },

    #[error("ball separation did not terminate within {steps} steps")]
    SeparationFailure { steps: usize },

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    ConfigParse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
