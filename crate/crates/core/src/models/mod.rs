//! Statistical models built on top of the tube machinery.
//!
//! Each submodule packages one worked application: an exponential
//! regression test ([`expreg`]), simultaneous confidence bands for
//! quadratic trend surfaces ([`scb`]), and a score test for a normal
//! location mixture ([`mixture`]).  [`builtins`] collects small
//! closed-form manifolds useful for validation and the command line.

pub mod builtins;
pub mod expreg;
pub mod mixture;
pub mod scb;

use crate::error::{CoreError, Result};
use crate::quadrature::DomainRect;

/// Observed data for the model fits: an `n x d` matrix of covariates and
/// an optional response vector of length `n`.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Vec<f64>,
    n: usize,
    d: usize,
    y: Option<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from a row-major `n x d` covariate matrix and an
    /// optional response.  Requires at least one observation, finite
    /// entries throughout, and a response length matching `n`.
    pub fn new(x: Vec<f64>, d: usize, y: Option<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(CoreError::InvalidData(
                "dataset needs at least one covariate column".into(),
            ));
        }
        if x.is_empty() || x.len() % d != 0 {
            return Err(CoreError::InvalidData(format!(
                "covariate matrix of {} entries is not a non-empty multiple of d = {d}",
                x.len()
            )));
        }
        let n = x.len() / d;
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidData(format!(
                "covariate entry {bad} is not finite"
            )));
        }
        if let Some(resp) = &y {
            if resp.len() != n {
                return Err(CoreError::InvalidData(format!(
                    "response has {} entries but the design has {n} rows",
                    resp.len()
                )));
            }
            if let Some(bad) = resp.iter().position(|v| !v.is_finite()) {
                return Err(CoreError::InvalidData(format!(
                    "response entry {bad} is not finite"
                )));
            }
        }
        Ok(Self { x, n, d, y })
    }

    /// Convenience constructor for a single covariate column.
    pub fn univariate(x: Vec<f64>, y: Option<Vec<f64>>) -> Result<Self> {
        Self::new(x, 1, y)
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.n
    }

    /// True when the dataset holds no rows (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of covariate columns.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Covariate row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// The full covariate column when `d == 1`.
    pub fn xs(&self) -> Result<&[f64]> {
        if self.d == 1 {
            Ok(&self.x)
        } else {
            Err(CoreError::InvalidData(format!(
                "expected a single covariate column, found {}",
                self.d
            )))
        }
    }

    /// The response vector, if one was supplied.
    pub fn y(&self) -> Option<&[f64]> {
        self.y.as_deref()
    }

    /// The response vector, or an error naming the caller's requirement.
    pub fn y_required(&self) -> Result<&[f64]> {
        self.y
            .as_deref()
            .ok_or_else(|| CoreError::InvalidData("a response vector is required".into()))
    }
}

/// Maximizes `f` over a one-dimensional domain: a dense scan with
/// roughly `intervals` steps spread over the included segments, followed
/// by golden-section refinement inside the best cell to width `tol`.
/// Returns `(argmax, max)`.  Nodes where `f` is undefined may report
/// `f64::NEG_INFINITY` and are skipped.
pub(crate) fn sup_1d<F>(domain: &DomainRect, intervals: usize, tol: f64, f: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if domain.dim() != 1 {
        return Err(CoreError::InvalidArgument(format!(
            "grid search expects a one-dimensional domain, found {}",
            domain.dim()
        )));
    }
    if intervals < 2 {
        return Err(CoreError::InvalidArgument(
            "grid search needs at least two intervals".into(),
        ));
    }
    let segments = domain.segments(0);
    let total: f64 = segments.iter().map(|&(lo, hi)| hi - lo).sum();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_x = f64::NAN;
    let mut best_segment = 0usize;
    let mut best_step = 0.0f64;
    for (si, &(lo, hi)) in segments.iter().enumerate() {
        let share = ((intervals as f64) * (hi - lo) / total).round().max(2.0) as usize;
        let step = (hi - lo) / share as f64;
        for j in 0..=share {
            let x = if j == share { hi } else { lo + step * j as f64 };
            let value = f(x)?;
            if value > best_value {
                best_value = value;
                best_x = x;
                best_segment = si;
                best_step = step;
            }
        }
    }
    if !best_value.is_finite() {
        return Err(CoreError::NoConvergence(
            "objective is undefined at every grid node".into(),
        ));
    }
    let (seg_lo, seg_hi) = segments[best_segment];
    let mut a = (best_x - best_step).max(seg_lo);
    let mut b = (best_x + best_step).min(seg_hi);
    // Golden-section polish; keep the best point ever seen so a
    // non-unimodal cell can never degrade the grid answer.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let keep = |x: f64, v: f64, best: &mut (f64, f64)| {
        if v > best.1 {
            *best = (x, v);
        }
    };
    let mut best = (best_x, best_value);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    keep(c, fc, &mut best);
    keep(d, fd, &mut best);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            keep(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            keep(d, fd, &mut best);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        let ds = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 2, None).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.row(1), &[3.0, 4.0]);
        assert!(ds.xs().is_err());
        assert!(ds.y().is_none());
        assert!(ds.y_required().is_err());

        let ds = Dataset::univariate(vec![0.5, 1.5], Some(vec![1.0, -1.0])).unwrap();
        assert_eq!(ds.xs().unwrap(), &[0.5, 1.5]);
        assert_eq!(ds.y_required().unwrap(), &[1.0, -1.0]);

        assert!(Dataset::new(vec![], 1, None).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, None).is_err());
        assert!(Dataset::new(vec![1.0, f64::NAN], 1, None).is_err());
        assert!(Dataset::univariate(vec![1.0], Some(vec![1.0, 2.0])).is_err());
        assert!(Dataset::univariate(vec![1.0], Some(vec![f64::INFINITY])).is_err());
    }

    #[test]
    fn grid_search_finds_smooth_maximum() {
        let dom = DomainRect::new(&[(0.0, 3.0)]).unwrap();
        let (x, v) = sup_1d(&dom, 60, 1e-12, |t| Ok(-(t - 1.234_567).powi(2))).unwrap();
        assert!((x - 1.234_567).abs() < 1e-6, "argmax {x}");
        assert!(v > -1e-12);
    }

    #[test]
    fn grid_search_skips_undefined_nodes() {
        let dom = DomainRect::new(&[(-1.0, 1.0)]).unwrap();
        let (x, _) = sup_1d(&dom, 80, 1e-10, |t| {
            if t == 0.0 {
                Ok(f64::NEG_INFINITY)
            } else {
                Ok(1.0 - (t - 0.5).powi(2))
            }
        })
        .unwrap();
        assert!((x - 0.5).abs() < 1e-6);
    }

    #[test]
    fn grid_search_respects_excluded_slabs() {
        let dom = DomainRect::new(&[(-1.0, 1.0)])
            .unwrap()
            .with_exclusion(0, -0.2, 0.4)
            .unwrap();
        // The global maximum sits inside the excluded slab; the search
        // must settle on the best included point instead.
        let (x, _) = sup_1d(&dom, 100, 1e-10, |t| Ok(-t * t)).unwrap();
        assert!(
            (x - 0.4).abs() < 1e-9 || (x + 0.2).abs() < 1e-9,
            "argmax {x} should sit on a segment edge"
        );
    }
}
