//! Manifold abstraction: anything that can be evaluated to a jet at a
//! parameter point, in vector form (`l(x)` with derivatives), covariance
//! form (`σ` derivative matrices), or both.

use crate::error::{CoreError, Result};
use crate::geometry::{
    frame_from_covariance, frame_from_vector, CovarianceJet, Frame, JetOrder, VectorJet,
};

/// Which evaluation route to use when both are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Evaluate `l(x)` and its derivatives as ambient vectors.
    Vector,
    /// Evaluate derivative matrices of the covariance `σ(x, x′)` at `x′ = x`.
    Covariance,
}

/// A parameterized manifold on the unit sphere, defined through an
/// unnormalized vector field `l(x)` or through the covariance
/// `σ(x, x′) = ⟨l(x), l(x′)⟩` of the underlying process.
pub trait Manifold: Sync {
    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    /// Whether the given evaluation route is implemented.
    fn supports(&self, mode: EvalMode) -> bool;

    /// Vector jet at `x`.
    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        let _ = (x, order);
        Err(CoreError::UnsupportedMode(
            "manifold has no vector form".into(),
        ))
    }

    /// Covariance-derivative jet at `x`.
    fn covariance_jet(&self, x: &[f64], order: JetOrder) -> Result<CovarianceJet> {
        let _ = (x, order);
        Err(CoreError::UnsupportedMode(
            "manifold has no covariance form".into(),
        ))
    }

    /// Covariance `σ(x, y)` between two parameter points; required for
    /// simulation in covariance form.
    fn covariance_between(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let _ = (x, y);
        Err(CoreError::UnsupportedMode(
            "manifold has no cross-covariance".into(),
        ))
    }
}

impl<M: Manifold + ?Sized> Manifold for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn supports(&self, mode: EvalMode) -> bool {
        (**self).supports(mode)
    }
    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        (**self).vector_jet(x, order)
    }
    fn covariance_jet(&self, x: &[f64], order: JetOrder) -> Result<CovarianceJet> {
        (**self).covariance_jet(x, order)
    }
    fn covariance_between(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (**self).covariance_between(x, y)
    }
}

impl<M: Manifold + ?Sized> Manifold for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn supports(&self, mode: EvalMode) -> bool {
        (**self).supports(mode)
    }
    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        (**self).vector_jet(x, order)
    }
    fn covariance_jet(&self, x: &[f64], order: JetOrder) -> Result<CovarianceJet> {
        (**self).covariance_jet(x, order)
    }
    fn covariance_between(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (**self).covariance_between(x, y)
    }
}

/// Evaluate the frame at a parameter point through the chosen route,
/// tagging any failure with the point's coordinates.
pub fn frame_at<M: Manifold + ?Sized>(
    manifold: &M,
    x: &[f64],
    order: JetOrder,
    mode: EvalMode,
) -> Result<Frame> {
    let result = match mode {
        EvalMode::Vector => manifold
            .vector_jet(x, order)
            .and_then(|jet| frame_from_vector(&jet, order)),
        EvalMode::Covariance => manifold
            .covariance_jet(x, order)
            .and_then(|jet| frame_from_covariance(&jet, order)),
    };
    result.map_err(|e| e.at_node(x))
}

/// Normalized manifold point `T(x) = l(x)/‖l(x)‖` (vector form only).
pub fn unit_vector<M: Manifold + ?Sized>(manifold: &M, x: &[f64]) -> Result<Vec<f64>> {
    let jet = manifold
        .vector_jet(x, JetOrder::Value)
        .map_err(|e| e.at_node(x))?;
    let norm = jet.l().iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-12 * (jet.ambient_len() as f64).sqrt();
    if norm <= tol {
        return Err(CoreError::SingularPoint {
            location: x.to_vec(),
            detail: format!("‖l‖ = {norm:.3e} is at or below the tolerance {tol:.3e}"),
        });
    }
    Ok(jet.l().iter().map(|v| v / norm).collect())
}

/// Vector-form manifold defined by a jet-evaluating closure.
pub struct VectorManifoldFn<F> {
    dim: usize,
    eval: F,
}

impl<F> VectorManifoldFn<F>
where
    F: Fn(&[f64], JetOrder) -> Result<VectorJet> + Sync,
{
    pub fn new(dim: usize, eval: F) -> Self {
        VectorManifoldFn { dim, eval }
    }
}

impl<F> Manifold for VectorManifoldFn<F>
where
    F: Fn(&[f64], JetOrder) -> Result<VectorJet> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn supports(&self, mode: EvalMode) -> bool {
        mode == EvalMode::Vector
    }

    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        if x.len() != self.dim {
            return Err(CoreError::InvalidArgument(format!(
                "point has {} coordinates, manifold dimension is {}",
                x.len(),
                self.dim
            )));
        }
        (self.eval)(x, order)
    }
}

/// Covariance-form manifold defined by a derivative-matrix closure and a
/// cross-covariance closure.
pub struct CovarianceManifoldFn<F, G> {
    dim: usize,
    eval: F,
    between: G,
}

impl<F, G> CovarianceManifoldFn<F, G>
where
    F: Fn(&[f64], JetOrder) -> Result<CovarianceJet> + Sync,
    G: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    pub fn new(dim: usize, eval: F, between: G) -> Self {
        CovarianceManifoldFn { dim, eval, between }
    }
}

impl<F, G> Manifold for CovarianceManifoldFn<F, G>
where
    F: Fn(&[f64], JetOrder) -> Result<CovarianceJet> + Sync,
    G: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn supports(&self, mode: EvalMode) -> bool {
        mode == EvalMode::Covariance
    }

    fn covariance_jet(&self, x: &[f64], order: JetOrder) -> Result<CovarianceJet> {
        if x.len() != self.dim {
            return Err(CoreError::InvalidArgument(format!(
                "point has {} coordinates, manifold dimension is {}",
                x.len(),
                self.dim
            )));
        }
        (self.eval)(x, order)
    }

    fn covariance_between(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        (self.between)(x, y)
    }
}
