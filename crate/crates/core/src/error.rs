use crate::expr::{EvalError, ParseError};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("metric is degenerate at {point:?} (|det g| = {det:e})")]
    DegenerateMetric { det: f64, point: Vec<f64> },
    #[error("metric signature at {point:?} is {found:?}, declared {declared:?}")]
    Signature { point: Vec<f64>, found: (usize, usize), declared: (usize, usize) },
    #[error("point {point:?} lies outside the chart's valid box")]
    OutsideChart { point: Vec<f64> },
    #[error("plane is degenerate (g(u,u)g(v,v) - g(u,v)^2 = {den:e})")]
    DegeneratePlane { den: f64 },
    #[error("gave up after {0} consecutive degenerate plane samples")]
    TooManyRejections(usize),
    #[error("immersion differential is rank deficient at {at:?} (smallest singular value {sigma:e})")]
    RankDeficient { at: Vec<f64>, sigma: f64 },
    #[error("induced metric is degenerate at {at:?} (|det| = {det:e}); use the lightlike geodesy test")]
    DegenerateSubmanifold { at: Vec<f64>, det: f64 },
    #[error("induced metric is not degenerate at {at:?} (|det| = {det:e}); the lightlike test does not apply")]
    NotLightlike { at: Vec<f64>, det: f64 },
    #[error("vector is not normal to the submanifold (tangential part {0:e})")]
    NotNormal(f64),
    #[error("vector field vanishes at {0:?}")]
    ZeroField(Vec<f64>),
    #[error("point is outside the patch: {0}")]
    OutOfPatch(String),
    #[error("hypersurface projection failed to converge ({0})")]
    Projection(String),
    #[error("hypersurface normals span {rank} fiber directions, need {needed}")]
    InsufficientHypersurfaces { rank: usize, needed: usize },
    #[error("hypersurface {index} is not saturated by the base leaves: {reason}")]
    NotSaturated { index: usize, reason: String },
    #[error("warping function is not positive at {point:?} (value {value})")]
    WarpNotPositive { point: Vec<f64>, value: f64 },
}

impl GeomError {
    /// True for failures of the numerics at a point (degeneracy, domain errors,
    /// chart exits) as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            GeomError::Parse(_)
                | GeomError::Dimension { .. }
                | GeomError::Invalid(_)
                | GeomError::NotSaturated { .. }
                | GeomError::InsufficientHypersurfaces { .. }
        )
    }
}
