//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.  Geometric failures carry the parameter-space
/// coordinates at which they occurred so that callers integrating over a
/// grid can report the offending node.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller-supplied argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The manifold map vanishes (or the covariance diagonal is non-positive)
    /// at a parameter point, so the normalized direction is undefined there.
    #[error("singular point at x = {location:?}: {detail}")]
    SingularPoint { location: Vec<f64>, detail: String },

    /// The induced metric failed to be positive definite at a parameter
    /// point: tangent vectors are linearly dependent there.
    #[error("degenerate metric at x = {location:?}: {detail}")]
    DegenerateMetric { location: Vec<f64>, detail: String },

    /// A covariance matrix was asymmetric beyond tolerance or otherwise not
    /// a valid Gram matrix.
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    /// A design matrix column is (numerically) linearly dependent on the
    /// preceding columns.
    #[error("rank-deficient matrix: column {column} has pivot {pivot:.3e} below tolerance")]
    RankDeficient { column: usize, pivot: f64 },

    /// Floating-point overflow in a model evaluation.
    #[error("overflow: {0}")]
    Overflow(String),

    /// An iterative routine failed to converge to its documented tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A root-finding target lies outside the attainable range.
    #[error("unattainable target: {0}")]
    Unattainable(String),

    /// The manifold does not support the requested evaluation mode.
    #[error("unsupported evaluation mode: {0}")]
    UnsupportedMode(String),

    /// A failure during grid evaluation, tagged with the node at which the
    /// underlying evaluation failed.
    #[error("at node {location:?}: {source}")]
    AtNode {
        location: Vec<f64>,
        #[source]
        source: Box<CoreError>,
    },

    /// Data file or input-shape problem in a model driver.
    #[error("invalid data: {0}")]
    InvalidData(String),
}

impl CoreError {
    /// Attach node coordinates to an error that does not already carry a
    /// location, for diagnosis of failures inside grid sweeps.
    pub fn at_node(self, node: &[f64]) -> CoreError {
        match self {
            CoreError::SingularPoint { location, detail } if location.is_empty() => {
                CoreError::SingularPoint {
                    location: node.to_vec(),
                    detail,
                }
            }
            CoreError::DegenerateMetric { location, detail } if location.is_empty() => {
                CoreError::DegenerateMetric {
                    location: node.to_vec(),
                    detail,
                }
            }
            e @ (CoreError::SingularPoint { .. }
            | CoreError::DegenerateMetric { .. }
            | CoreError::AtNode { .. }) => e,
            other => CoreError::AtNode {
                location: node.to_vec(),
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
