use thiserror::Error;

/// Errors raised by the geometric routines.
///
/// Indices carried by variants are 1-based when they refer to a position in
/// an input list (matching the order the caller supplied), and 0-based when
/// they refer to a segment or vertex of a polygonal.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank deficient at input {0}")]
    RankDeficient(usize),
    #[error("degenerate geodesic arc (trivial or antipodal endpoints)")]
    DegenerateArc,
    #[error("degenerate segment {0}")]
    DegenerateSegment(usize),
    #[error("invalid polygonal: {0}")]
    InvalidPolygonal(String),
    #[error("polygonal lies in a too-low-dimensional affine subspace")]
    FlatPolygonal,
    #[error("normal order {j} outside 1..={max}")]
    InvalidOrder { j: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("curve is not smoothly turning at s = {0}")]
    NotSmoothlyTurningAt(f64),
    #[error("curve is not mildly smoothly turning at s = {0}")]
    NotMildlyTurningAt(f64),
    #[error("unknown curve '{0}'")]
    UnknownCurve(String),
    #[error("bad curve parameters: {0}")]
    BadParams(String),
    #[error("parameter {0} outside the curve domain")]
    OutOfDomain(f64),
    #[error("transition function is not invertible (zero total speed)")]
    NotInvertible,
    #[error("refinement sequence did not converge: {0}")]
    NotConverged(String),
    #[error("curve is degenerate at every refinement level: {0}")]
    DegenerateCurve(String),
    #[error("projection collapses the polygonal")]
    DegenerateProjection,
    #[error("point {0} projects onto the polar set")]
    NearPolar(usize),
    #[error("quadrature failed to reach tolerance on [{0}, {1}]")]
    QuadratureFailed(f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
