//! Tail probabilities and critical values for the supremum of a process
//! indexed by a manifold, from its tube constants.
//!
//! For `Z(x) = ⟨T(x), ε⟩` with `ε` standard normal (optionally divided by
//! an independent variance estimate) or uniform on the sphere, the upper
//! tail of `sup Z` expands as `Σ_k kap[k]/A_{d+1−k} · tail_k(c)` where
//! `tail_k` is a chi-square, scaled-F, or beta upper tail.

use crate::error::{CoreError, Result};
use crate::specfun::{beta_tail, chisq_tail, f_tail, sphere_area};
use crate::tube::TubeConstants;

/// Distribution of the length component of the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    /// Standard Gaussian `ε`.
    Gaussian,
    /// Gaussian divided by an independent `√(χ²_ν/ν)`.
    Studentized,
    /// Direction uniform on the unit sphere in `R^n`; the cutoff is the
    /// inner product `w ∈ (0, 1]` itself.
    SphereUniform,
}

/// One- or two-sided supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    OneSided,
    TwoSided,
}

/// Full description of the process whose supremum is calibrated.
#[derive(Debug, Clone, Copy)]
pub struct ProcessSpec {
    kind: ProcessKind,
    side: Side,
    df: f64,
    ambient_n: usize,
}

impl ProcessSpec {
    pub fn gaussian(side: Side) -> Self {
        ProcessSpec {
            kind: ProcessKind::Gaussian,
            side,
            df: 0.0,
            ambient_n: 0,
        }
    }

    /// Studentized process with `df` residual degrees of freedom.
    pub fn studentized(df: f64, side: Side) -> Result<Self> {
        if !(df > 0.0) || !df.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "degrees of freedom must be positive and finite, got {df}"
            )));
        }
        Ok(ProcessSpec {
            kind: ProcessKind::Studentized,
            side,
            df,
            ambient_n: 0,
        })
    }

    /// Uniform-direction process on the unit sphere in `R^n`.
    pub fn sphere_uniform(ambient_n: usize, side: Side) -> Result<Self> {
        if ambient_n < 3 {
            return Err(CoreError::InvalidArgument(format!(
                "ambient dimension must be at least 3, got {ambient_n}"
            )));
        }
        Ok(ProcessSpec {
            kind: ProcessKind::SphereUniform,
            side,
            df: 0.0,
            ambient_n,
        })
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn df(&self) -> Option<f64> {
        (self.kind == ProcessKind::Studentized).then_some(self.df)
    }

    pub fn ambient_n(&self) -> Option<usize> {
        (self.kind == ProcessKind::SphereUniform).then_some(self.ambient_n)
    }
}

/// A tail probability together with a flag marking that the raw series
/// value fell outside `[0, 1]` and was clamped (the tube series is an
/// approximation and may exceed 1 below the calibration range).
#[derive(Debug, Clone, Copy)]
pub struct TailProbability {
    pub value: f64,
    pub clamped: bool,
}

/// Validate the cutoff for the process kind.
fn check_cutoff(c: f64, proc: &ProcessSpec) -> Result<()> {
    match proc.kind {
        ProcessKind::Gaussian | ProcessKind::Studentized => {
            if !(c > 0.0) || !c.is_finite() {
                return Err(CoreError::InvalidArgument(format!(
                    "cutoff must be positive and finite, got {c}"
                )));
            }
        }
        ProcessKind::SphereUniform => {
            if !(c > 0.0 && c <= 1.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "uniform-process cutoff is the inner product w in (0, 1], got {c}"
                )));
            }
        }
    }
    Ok(())
}

/// Upper tail probability `P(sup ≥ c)` of the supremum of the process over
/// the manifold, by the tube series.  For the uniform process `c` is the
/// inner-product cutoff `w ∈ (0, 1]`.
pub fn tailp(c: f64, constants: &TubeConstants, proc: &ProcessSpec) -> Result<TailProbability> {
    check_cutoff(c, proc)?;
    let d = constants.dim();
    if proc.kind == ProcessKind::SphereUniform && proc.ambient_n <= d + 1 {
        return Err(CoreError::InvalidArgument(format!(
            "uniform process needs ambient dimension > d + 1 = {}, got {}",
            d + 1,
            proc.ambient_n
        )));
    }
    let mut p = 0.0;
    for (k, &coeff) in constants.kap().iter().enumerate() {
        let j = d + 1 - k;
        let tail = match proc.kind {
            ProcessKind::Gaussian => chisq_tail(j, c * c)?.value(),
            ProcessKind::Studentized => f_tail(j, proc.df, c * c / j as f64)?.value(),
            ProcessKind::SphereUniform => {
                let n = proc.ambient_n;
                beta_tail(j as f64 / 2.0, (n - j) as f64 / 2.0, c * c)?.value()
            }
        };
        p += coeff / sphere_area(j) * tail;
    }
    if proc.side == Side::TwoSided {
        p *= 2.0;
    }
    if p > 1.0 {
        Ok(TailProbability {
            value: 1.0,
            clamped: true,
        })
    } else if p < 0.0 {
        Ok(TailProbability {
            value: 0.0,
            clamped: true,
        })
    } else {
        Ok(TailProbability {
            value: p,
            clamped: false,
        })
    }
}

/// Critical value: the cutoff `c` with `tailp(c) = alpha`, located on the
/// strictly decreasing branch of the tail curve (`c ≥ √d` for the Gaussian
/// and Studentized processes, the whole of `(0, 1]` for the uniform
/// process).  The result satisfies `|tailp(c) − alpha| ≤ 1e-10`.
pub fn critval(alpha: f64, constants: &TubeConstants, proc: &ProcessSpec) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let d = constants.dim();
    let p = |c: f64| -> Result<f64> { Ok(tailp(c, constants, proc)?.value) };

    let (mut lo, mut hi) = match proc.kind {
        ProcessKind::Gaussian | ProcessKind::Studentized => {
            let lo = (d as f64).sqrt();
            let mut hi = (2.0 * (1.0 / alpha).ln()).sqrt() + 5.0;
            let p_lo = p(lo)?;
            if p_lo < alpha {
                return Err(CoreError::Unattainable(format!(
                    "tail probability at the start of the monotone branch (c = {lo:.6}) is \
                     {p_lo:.6e}, below alpha = {alpha}; increase alpha or compute more \
                     series terms"
                )));
            }
            let mut grow = 0;
            while p(hi)? >= alpha {
                hi = lo + 2.0 * (hi - lo);
                grow += 1;
                if grow > 200 {
                    return Err(CoreError::NoConvergence(
                        "could not bracket the critical value from above".into(),
                    ));
                }
            }
            (lo, hi)
        }
        ProcessKind::SphereUniform => {
            let lo = 1e-8;
            let p_lo = p(lo)?;
            if p_lo < alpha {
                return Err(CoreError::Unattainable(format!(
                    "largest attainable tail probability is {p_lo:.6e}, below alpha = \
                     {alpha}; increase alpha or compute more series terms"
                )));
            }
            (lo, 1.0) // tailp(1) = 0 < alpha
        }
    };

    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if p(mid)? >= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let achieved = p(c)?;
    if (achieved - alpha).abs() > 1e-10 {
        return Err(CoreError::NoConvergence(format!(
            "bisection converged to c = {c} with tail probability {achieved:.12e}, not \
             within 1e-10 of alpha = {alpha}"
        )));
    }
    Ok(c)
}
