//! Simultaneous confidence bands for quadratic trend surfaces.
//!
//! A full quadratic polynomial in `d` covariates is fitted by least
//! squares, and a band `fit(x) ± c * sigma_hat * |l*(x)|` is produced
//! whose critical value `c` calibrates simultaneous coverage over a
//! rectangle of covariate values.  The vector `l*(x) = R^{-T} f(x)`
//! (with `R` the triangular factor of the design) traces a manifold in
//! coefficient space whose tube constants convert the simultaneity
//! requirement into a tail bound for a Studentized process.

use crate::error::{CoreError, Result};
use crate::geometry::{JetOrder, VectorJet};
use crate::linalg::{qr_decompose, DenseMatrix, QrFactors};
use crate::manifold::{EvalMode, Manifold};
use crate::prob::{critval, ProcessSpec, Side};
use crate::quadrature::DomainRect;
use crate::tube::{tube_constants, TubeConstants, TubeOptions};

use super::Dataset;

/// The full quadratic basis `(1, x_k, x_i x_j for i <= j)` in `d`
/// variables, with its first and second partial derivatives.
#[derive(Debug, Clone)]
pub struct QuadraticBasis {
    dim: usize,
    pairs: Vec<(usize, usize)>,
}

impl QuadraticBasis {
    pub fn new(dim: usize) -> Self {
        let mut pairs = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                pairs.push((i, j));
            }
        }
        Self { dim, pairs }
    }

    /// Number of covariates.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis functions `p = 1 + d + d(d+1)/2`.
    pub fn len(&self) -> usize {
        1 + self.dim + self.pairs.len()
    }

    /// Always false; the basis contains at least the constant.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Basis values at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut f = Vec::with_capacity(self.len());
        f.push(1.0);
        f.extend_from_slice(x);
        for &(i, j) in &self.pairs {
            f.push(x[i] * x[j]);
        }
        f
    }

    /// First partial derivatives with respect to `x_k`.
    pub fn eval_d1(&self, x: &[f64], k: usize) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut f = vec![0.0; 1 + self.dim];
        f[1 + k] = 1.0;
        for &(i, j) in &self.pairs {
            let mut v = 0.0;
            if i == k {
                v += x[j];
            }
            if j == k {
                v += x[i];
            }
            f.push(v);
        }
        f
    }

    /// Second partial derivatives with respect to `x_k` and `x_l`.
    pub fn eval_d2(&self, k: usize, l: usize) -> Vec<f64> {
        let mut f = vec![0.0; 1 + self.dim];
        for &(i, j) in &self.pairs {
            let mut v = 0.0;
            if i == k && j == l {
                v += 1.0;
            }
            if i == l && j == k {
                v += 1.0;
            }
            f.push(v);
        }
        f
    }
}

/// A fitted quadratic trend surface.
#[derive(Debug)]
pub struct ScbModel {
    basis: QuadraticBasis,
    qr: QrFactors,
    coefficients: Vec<f64>,
    sigma_hat: f64,
    residual_df: f64,
    n: usize,
}

impl ScbModel {
    /// Fits the quadratic surface by least squares.  Requires a response
    /// and strictly more observations than basis functions.
    pub fn fit(data: &Dataset) -> Result<Self> {
        let y = data.y_required()?;
        let basis = QuadraticBasis::new(data.dim());
        let p = basis.len();
        let n = data.len();
        if n <= p {
            return Err(CoreError::InvalidData(format!(
                "fitting {p} coefficients needs more than {p} observations, found {n}"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..n).map(|i| basis.eval(data.row(i))).collect();
        let design = DenseMatrix::from_rows(&rows)?;
        let qr = qr_decompose(&design)?;
        let qty = qr.apply_qt(y)?;
        let coefficients = qr.solve_r(&qty[..p])?;
        let rss: f64 = qty[p..].iter().map(|v| v * v).sum();
        let residual_df = (n - p) as f64;
        let sigma_hat = (rss / residual_df).sqrt();
        Ok(Self {
            basis,
            qr,
            coefficients,
            sigma_hat,
            residual_df,
            n,
        })
    }

    /// Number of covariates.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Number of fitted coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.basis.len()
    }

    /// Number of observations used by the fit.
    pub fn observations(&self) -> usize {
        self.n
    }

    /// Fitted coefficients in basis order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Residual-based scale estimate.
    pub fn sigma_hat(&self) -> f64 {
        self.sigma_hat
    }

    /// Residual degrees of freedom `n - p`.
    pub fn residual_df(&self) -> f64 {
        self.residual_df
    }

    /// Fitted value at `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.basis
            .eval(x)
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| f * c)
            .sum()
    }

    /// The band direction `l*(x) = R^{-T} f(x)`.
    pub fn band_direction(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.qr.solve_rt(&self.basis.eval(x))
    }
}

impl Manifold for ScbModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn supports(&self, mode: EvalMode) -> bool {
        matches!(mode, EvalMode::Vector)
    }

    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        let d = self.dim();
        if x.len() != d {
            return Err(CoreError::InvalidArgument(format!(
                "expected {d} coordinates, found {}",
                x.len()
            )));
        }
        let p = self.basis.len();
        let mut jet = VectorJet::new(p, d, order);
        jet.l_mut()
            .copy_from_slice(&self.qr.solve_rt(&self.basis.eval(x))?);
        if order >= JetOrder::Tangent {
            for k in 0..d {
                let col = self.qr.solve_rt(&self.basis.eval_d1(x, k))?;
                for (i, v) in col.into_iter().enumerate() {
                    jet.set_dl(i, k, v);
                }
            }
        }
        if order >= JetOrder::Curvature {
            for k1 in 0..d {
                for k2 in k1..d {
                    let col = self.qr.solve_rt(&self.basis.eval_d2(k1, k2))?;
                    for (i, v) in col.into_iter().enumerate() {
                        jet.set_ddl(i, k1, k2, v);
                    }
                }
            }
        }
        Ok(jet)
    }
}

/// Presentation options for [`confidence_band`].
#[derive(Debug, Clone)]
pub struct BandOptions {
    /// Simpson subintervals per axis for the tube constants.
    pub mesh: Vec<usize>,
    /// Output points per axis.
    pub grid_per_axis: usize,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self {
            mesh: vec![100],
            grid_per_axis: 201,
        }
    }
}

/// One evaluation point of a confidence band.
#[derive(Debug, Clone)]
pub struct BandPoint {
    pub x: Vec<f64>,
    pub center: f64,
    pub half_width: f64,
}

/// A simultaneous confidence band over a covariate rectangle.
#[derive(Debug)]
pub struct ConfidenceBand {
    pub alpha: f64,
    pub critical_value: f64,
    pub sigma_hat: f64,
    pub residual_df: f64,
    pub constants: TubeConstants,
    pub points: Vec<BandPoint>,
}

/// Builds the simultaneous band `fit(x) ± c * sigma_hat * |l*(x)|` over
/// `domain` at level `alpha`, with `c` computed from the tube constants of the
/// band-direction manifold under a two-sided Studentized process with
/// `n - p` degrees of freedom.
pub fn confidence_band(
    model: &ScbModel,
    domain: &DomainRect,
    alpha: f64,
    options: &BandOptions,
) -> Result<ConfidenceBand> {
    if domain.dim() != model.dim() {
        return Err(CoreError::InvalidArgument(format!(
            "domain dimension {} does not match model dimension {}",
            domain.dim(),
            model.dim()
        )));
    }
    if options.grid_per_axis < 2 {
        return Err(CoreError::InvalidArgument(
            "band output needs at least two points per axis".into(),
        ));
    }
    let tube_opts = TubeOptions {
        mesh: options.mesh.clone(),
        ..TubeOptions::new(EvalMode::Vector)
    };
    let constants = tube_constants(model, domain, &tube_opts)?;
    let spec = ProcessSpec::studentized(model.residual_df(), Side::TwoSided)?;
    let critical_value = critval(alpha, &constants, &spec)?;

    let d = model.dim();
    let g = options.grid_per_axis;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let (lo, hi) = domain.bounds(k);
            (0..g)
                .map(|j| lo + (hi - lo) * j as f64 / (g - 1) as f64)
                .collect()
        })
        .collect();
    let total = g.pow(d as u32);
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let x: Vec<f64> = (0..d).map(|k| axes[k][idx[k]]).collect();
        let dir = model.band_direction(&x)?;
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        points.push(BandPoint {
            center: model.predict(&x),
            half_width: critical_value * model.sigma_hat() * norm,
            x,
        });
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < g {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(ConfidenceBand {
        alpha,
        critical_value,
        sigma_hat: model.sigma_hat(),
        residual_df: model.residual_df(),
        constants,
        points,
    })
}
