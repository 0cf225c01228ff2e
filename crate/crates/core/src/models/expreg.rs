//! Alignment test for exponential regression.
//!
//! For responses observed at covariates `x_1, ..., x_n`, the model
//! `y_i = b * exp(g * x_i) + noise` is tested against pure noise through
//! the maximal alignment between the normalized response and the
//! normalized regression direction `l(g) = (exp(g x_1), ..., exp(g x_n))`
//! over a rate window.  Under the null hypothesis the response direction
//! is uniform on the unit sphere in `R^n`, so the exceedance probability
//! of the alignment supremum follows from the tube constants of the
//! curve `g -> l(g)/|l(g)|`.

use crate::error::{CoreError, Result};
use crate::geometry::{cov_side, CovarianceJet, JetOrder, VectorJet};
use crate::manifold::{EvalMode, Manifold};
use crate::prob::{tailp, ProcessSpec, Side, TailProbability};
use crate::quadrature::DomainRect;
use crate::tube::{tube_constants, TubeConstants, TubeOptions};

use super::{sup_1d, Dataset};

/// Largest exponent passed to `exp` before reporting overflow.
const EXP_LIMIT: f64 = 700.0;

fn checked_exp(t: f64) -> Result<f64> {
    if t > EXP_LIMIT {
        return Err(CoreError::Overflow(format!(
            "exp({t:.1}) overflows; tighten the rate limits or rescale the covariates"
        )));
    }
    Ok(t.exp())
}

/// The exponential regression curve `g -> (exp(g x_i))_i` for a fixed
/// set of univariate covariates, together with its alignment test.
#[derive(Debug, Clone)]
pub struct ExpRegression {
    data: Dataset,
}

/// Outcome of the alignment test.
#[derive(Debug, Clone)]
pub struct ExpRegReport {
    /// Supremum of `|<l(g), y>| / (|l(g)| |y|)` over the rate window.
    pub statistic: f64,
    /// Rate at which the supremum is attained.
    pub best_rate: f64,
    /// Exceedance probability of the statistic under the null.
    pub p_value: TailProbability,
    /// Tube constants of the normalized regression curve.
    pub constants: TubeConstants,
}

impl ExpRegression {
    /// Wraps a dataset with a single covariate column.
    pub fn new(data: Dataset) -> Result<Self> {
        data.xs()?;
        Ok(Self { data })
    }

    /// The underlying dataset.
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn xs(&self) -> &[f64] {
        self.data.xs().expect("validated at construction")
    }

    /// Normalized alignment `|<l(g), y>| / (|l(g)| |y|)` at a single rate,
    /// evaluated with the largest exponent factored out so that wide rate
    /// windows cannot overflow.
    pub fn alignment(&self, gamma: f64) -> Result<f64> {
        let xs = self.xs();
        let y = self.data.y_required()?;
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if y_norm == 0.0 {
            return Err(CoreError::InvalidData(
                "response vector is identically zero".into(),
            ));
        }
        let peak = xs
            .iter()
            .map(|&x| gamma * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut dot = 0.0;
        let mut sq = 0.0;
        for (&x, &yi) in xs.iter().zip(y) {
            let e = (gamma * x - peak).exp();
            dot += e * yi;
            sq += e * e;
        }
        Ok((dot / (sq.sqrt() * y_norm)).abs())
    }

    /// Supremum of the alignment over `rates`, located by a dense scan
    /// (four nodes per quadrature subinterval) plus golden-section
    /// refinement.  Returns `(best_rate, statistic)`.
    pub fn alignment_supremum(&self, rates: &DomainRect, mesh: &[usize]) -> Result<(f64, f64)> {
        if mesh.len() != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "rate search expects one mesh entry, found {}",
                mesh.len()
            )));
        }
        sup_1d(rates, 4 * mesh[0], 1e-10, |g| self.alignment(g))
    }

    /// Runs the full test: tube constants over the rate window, the
    /// alignment supremum, and its two-sided exceedance probability under
    /// the uniform-direction null.
    pub fn run_test(&self, rates: &DomainRect, mesh: &[usize]) -> Result<ExpRegReport> {
        let options = TubeOptions {
            mesh: mesh.to_vec(),
            ..TubeOptions::new(EvalMode::Vector)
        };
        let constants = tube_constants(self, rates, &options)?;
        let (best_rate, statistic) = self.alignment_supremum(rates, mesh)?;
        let spec = ProcessSpec::sphere_uniform(self.data.len(), Side::TwoSided)?;
        let cutoff = statistic.clamp(f64::MIN_POSITIVE, 1.0);
        let p_value = tailp(cutoff, &constants, &spec)?;
        Ok(ExpRegReport {
            statistic,
            best_rate,
            p_value,
            constants,
        })
    }
}

impl Manifold for ExpRegression {
    fn dim(&self) -> usize {
        1
    }

    fn supports(&self, _mode: EvalMode) -> bool {
        true
    }

    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        if x.len() != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "expected 1 coordinate, found {}",
                x.len()
            )));
        }
        let gamma = x[0];
        let xs = self.xs();
        let mut jet = VectorJet::new(xs.len(), 1, order);
        for (i, &xi) in xs.iter().enumerate() {
            let e = checked_exp(gamma * xi)?;
            jet.l_mut()[i] = e;
            if order >= JetOrder::Tangent {
                jet.set_dl(i, 0, xi * e);
            }
            if order >= JetOrder::Curvature {
                jet.set_ddl(i, 0, 0, xi * xi * e);
            }
        }
        Ok(jet)
    }

    fn covariance_jet(&self, x: &[f64], order: JetOrder) -> Result<CovarianceJet> {
        if x.len() != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "expected 1 coordinate, found {}",
                x.len()
            )));
        }
        let gamma = x[0];
        let xs = self.xs();
        let side = cov_side(1, order);
        let mut m = vec![0.0; side * side];
        for &xi in xs {
            let e2 = checked_exp(2.0 * gamma * xi)?;
            let mut pow = [1.0; 5];
            for k in 1..5 {
                pow[k] = pow[k - 1] * xi;
            }
            for a in 0..side {
                for b in 0..side {
                    m[a * side + b] += pow[a + b] * e2;
                }
            }
        }
        CovarianceJet::from_matrix(1, order, m)
    }

    fn covariance_between(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != 1 || y.len() != 1 {
            return Err(CoreError::InvalidArgument(
                "expected 1 coordinate per point".into(),
            ));
        }
        let mut acc = 0.0;
        for &xi in self.xs() {
            acc += checked_exp((x[0] + y[0]) * xi)?;
        }
        Ok(acc)
    }
}
