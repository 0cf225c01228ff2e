//! Monte Carlo validation of tube-based tail probabilities.
//!
//! The supremum of the target process is replaced by its maximum over a
//! dense grid (a refinement of the quadrature grid), the process is
//! simulated exactly on that grid, and the exceedance fraction is
//! compared against the series-based tail probability.  Replicates use
//! counter-based random streams, so results are bitwise reproducible for
//! a fixed `(seed, reps, grid)` regardless of how the work is scheduled.

use crate::error::{CoreError, Result};
use crate::linalg::{pivoted_cholesky, DenseMatrix};
use crate::manifold::{unit_vector, EvalMode, Manifold};
use crate::prob::{ProcessKind, ProcessSpec, Side};
use crate::quadrature::DomainRect;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

/// Nodes whose process variance falls below this fraction of the largest
/// variance on the grid are dropped as singular.
const SINGULAR_DIAG_TOL: f64 = 1e-14;

/// Simulation controls for [`simulate_sup_tail`].
#[derive(Debug, Clone)]
pub struct McOptions {
    /// Evaluation route for the manifold.
    pub mode: EvalMode,
    /// Simpson subintervals per axis of the baseline quadrature grid.
    pub mesh: Vec<usize>,
    /// Grid refinement factor relative to the quadrature grid (>= 2).
    pub grid_mult: usize,
    /// Number of replicates (>= 1000).
    pub reps: u64,
    /// Stream seed.
    pub seed: u64,
    /// Series-based tail probability to compare against, if available.
    pub tube_reference: Option<f64>,
}

impl McOptions {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self {
            mode: EvalMode::Vector,
            mesh: vec![100],
            grid_mult: 4,
            reps,
            seed,
            tube_reference: None,
        }
    }
}

/// Agreement between the simulation and a series-based tail value.
#[derive(Debug, Clone, Copy)]
pub struct McComparison {
    pub tube_value: f64,
    /// `(estimate - tube_value) / std_error`.
    pub z_score: f64,
}

/// Result of a supremum-tail simulation.
#[derive(Debug, Clone)]
pub struct McReport {
    /// Fraction of replicates whose grid supremum reached the cutoff.
    pub estimate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / reps)`.
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
    /// Number of grid nodes actually simulated.
    pub grid_points: usize,
    /// Nodes discarded because the process is degenerate there.
    pub dropped_points: usize,
    /// Human-readable description of the grid.
    pub grid: String,
    pub comparison: Option<McComparison>,
}

enum GridProcess {
    /// Rows of unit vectors; scores are exact inner products with an
    /// ambient Gaussian draw.
    Direction { rows: Vec<Vec<f64>>, ambient: usize },
    /// Unit-diagonal factor of the grid correlation matrix; scores are
    /// `L e` for a standard Gaussian `e` of length `rank`.
    Factor { l: DenseMatrix, rank: usize },
}

impl GridProcess {
    fn draw_len(&self) -> usize {
        match self {
            GridProcess::Direction { ambient, .. } => *ambient,
            GridProcess::Factor { rank, .. } => *rank,
        }
    }

    fn points(&self) -> usize {
        match self {
            GridProcess::Direction { rows, .. } => rows.len(),
            GridProcess::Factor { l, .. } => l.rows(),
        }
    }

    /// Largest score over the grid, one- or two-sided.
    fn sup_score(&self, eps: &[f64], side: Side) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut fold = |z: f64| {
            let v = match side {
                Side::OneSided => z,
                Side::TwoSided => z.abs(),
            };
            if v > best {
                best = v;
            }
        };
        match self {
            GridProcess::Direction { rows, .. } => {
                for row in rows {
                    fold(row.iter().zip(eps).map(|(a, b)| a * b).sum());
                }
            }
            GridProcess::Factor { l, rank } => {
                for j in 0..l.rows() {
                    fold(l.row(j)[..*rank].iter().zip(eps).map(|(a, b)| a * b).sum());
                }
            }
        }
        best
    }
}

fn tensor_grid(domain: &DomainRect, mesh: &[usize], grid_mult: usize) -> Vec<Vec<f64>> {
    let d = domain.dim();
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            domain
                .axis_rule(k, grid_mult * mesh[k])
                .into_iter()
                .map(|(node, _)| node)
                .collect()
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        out.push((0..d).map(|k| axes[k][idx[k]]).collect());
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

fn resolve_mesh(domain: &DomainRect, mesh: &[usize]) -> Result<Vec<usize>> {
    let d = domain.dim();
    if mesh.len() == 1 {
        return Ok(vec![mesh[0]; d]);
    }
    if mesh.len() == d {
        return Ok(mesh.to_vec());
    }
    Err(CoreError::InvalidArgument(format!(
        "mesh needs 1 or {d} entries, found {}",
        mesh.len()
    )))
}

fn build_direction_rows<M: Manifold + ?Sized>(
    manifold: &M,
    grid: &[Vec<f64>],
) -> Result<(Vec<Vec<f64>>, usize)> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut dropped = 0usize;
    for x in grid {
        match unit_vector(manifold, x) {
            Ok(row) => rows.push(row),
            Err(CoreError::SingularPoint { .. }) | Err(CoreError::AtNode { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(CoreError::InvalidArgument(
            "every grid node is singular; nothing to simulate".into(),
        ));
    }
    let ambient = rows[0].len();
    if rows.iter().any(|r| r.len() != ambient) {
        return Err(CoreError::InvalidArgument(
            "manifold ambient dimension varies across the grid".into(),
        ));
    }
    Ok((rows, dropped))
}

fn build_correlation_factor<M: Manifold + ?Sized>(
    manifold: &M,
    grid: &[Vec<f64>],
) -> Result<(DenseMatrix, usize, usize)> {
    let mut diag = Vec::with_capacity(grid.len());
    for x in grid {
        diag.push(manifold.covariance_between(x, x)?);
    }
    let max_diag = diag.iter().cloned().fold(0.0f64, f64::max);
    if !(max_diag > 0.0) {
        return Err(CoreError::InvalidCovariance(
            "process variance vanishes on the whole grid".into(),
        ));
    }
    let kept: Vec<usize> = (0..grid.len())
        .filter(|&j| diag[j] > SINGULAR_DIAG_TOL * max_diag)
        .collect();
    let dropped = grid.len() - kept.len();
    let m = kept.len();
    let mut corr = DenseMatrix::zeros(m, m);
    for (a, &ja) in kept.iter().enumerate() {
        corr.set(a, a, 1.0);
        for (b, &jb) in kept.iter().enumerate().skip(a + 1) {
            let v =
                manifold.covariance_between(&grid[ja], &grid[jb])? / (diag[ja] * diag[jb]).sqrt();
            corr.set(a, b, v);
            corr.set(b, a, v);
        }
    }
    let l = pivoted_cholesky(&corr, 1e-10)?;
    let rank = l.cols();
    Ok((l, rank, dropped))
}

/// Estimate `P(sup Z >= cutoff)` by simulating the process exactly on a
/// refinement of the quadrature grid.
///
/// The grid refines each axis of the Simpson rule by `grid_mult`.  In
/// vector mode the normalized manifold directions are computed per node;
/// in covariance mode the grid correlation matrix is factored (nodes
/// with vanishing variance are dropped and counted).  Replicate `i`
/// draws from stream `i` of a counter-based generator, so the estimate
/// is independent of scheduling and reproducible bitwise.
pub fn simulate_sup_tail<M: Manifold + ?Sized>(
    manifold: &M,
    domain: &DomainRect,
    spec: &ProcessSpec,
    cutoff: f64,
    options: &McOptions,
) -> Result<McReport> {
    if manifold.dim() != domain.dim() {
        return Err(CoreError::InvalidArgument(format!(
            "manifold dimension {} does not match domain dimension {}",
            manifold.dim(),
            domain.dim()
        )));
    }
    if options.grid_mult < 2 {
        return Err(CoreError::InvalidArgument(
            "grid_mult must be at least 2".into(),
        ));
    }
    if options.reps < 1000 {
        return Err(CoreError::InvalidArgument(
            "a simulation needs at least 1000 replicates".into(),
        ));
    }
    match spec.kind() {
        ProcessKind::SphereUniform => {
            if !(cutoff > 0.0 && cutoff <= 1.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "sphere cutoff must lie in (0, 1], got {cutoff}"
                )));
            }
        }
        _ => {
            if !cutoff.is_finite() || cutoff <= 0.0 {
                return Err(CoreError::InvalidArgument(format!(
                    "cutoff must be positive and finite, got {cutoff}"
                )));
            }
        }
    }
    if !manifold.supports(options.mode) {
        return Err(CoreError::UnsupportedMode(format!(
            "manifold does not support {:?} evaluation",
            options.mode
        )));
    }

    let mesh = resolve_mesh(domain, &options.mesh)?;
    let grid = tensor_grid(domain, &mesh, options.grid_mult);
    let (process, dropped) = match options.mode {
        EvalMode::Vector => {
            let (rows, dropped) = build_direction_rows(manifold, &grid)?;
            let ambient = rows[0].len();
            if let Some(n) = spec.ambient_n() {
                if n != ambient {
                    return Err(CoreError::InvalidArgument(format!(
                        "sphere process has ambient dimension {n} but the manifold lives in {ambient}"
                    )));
                }
            }
            (GridProcess::Direction { rows, ambient }, dropped)
        }
        EvalMode::Covariance => {
            let (l, rank, dropped) = build_correlation_factor(manifold, &grid)?;
            if let Some(n) = spec.ambient_n() {
                if n < rank {
                    return Err(CoreError::InvalidArgument(format!(
                        "sphere process needs ambient dimension >= grid rank {rank}, got {n}"
                    )));
                }
            }
            (GridProcess::Factor { l, rank }, dropped)
        }
    };

    let draw_len = process.draw_len();
    let side = spec.side();
    let kind = spec.kind();
    let df = spec.df();
    let ambient_n = spec.ambient_n();
    let seed = options.seed;
    let residual_df = match (kind, ambient_n) {
        (ProcessKind::SphereUniform, Some(n)) => n.saturating_sub(draw_len),
        _ => 0,
    };

    let hits: u64 = (0..options.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep);
            let mut eps = vec![0.0f64; draw_len];
            for e in &mut eps {
                *e = StandardNormal.sample(&mut rng);
            }
            let sup = process.sup_score(&eps, side);
            let stat = match kind {
                ProcessKind::Gaussian => sup,
                ProcessKind::Studentized => {
                    let nu = df.expect("checked at construction");
                    let q: f64 = ChiSquared::new(nu).expect("df > 0").sample(&mut rng);
                    sup / (q / nu).sqrt()
                }
                ProcessKind::SphereUniform => {
                    let mut norm_sq: f64 = eps.iter().map(|e| e * e).sum();
                    if residual_df > 0 {
                        let extra: f64 = ChiSquared::new(residual_df as f64)
                            .expect("positive df")
                            .sample(&mut rng);
                        norm_sq += extra;
                    }
                    sup / norm_sq.sqrt()
                }
            };
            u64::from(stat >= cutoff)
        })
        .sum();

    let estimate = hits as f64 / options.reps as f64;
    let std_error = (estimate * (1.0 - estimate) / options.reps as f64).sqrt();
    let comparison = options.tube_reference.map(|tube_value| {
        let diff = estimate - tube_value;
        let z_score = if std_error > 0.0 {
            diff / std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        McComparison {
            tube_value,
            z_score,
        }
    });
    Ok(McReport {
        estimate,
        std_error,
        reps: options.reps,
        seed,
        grid_points: process.points(),
        dropped_points: dropped,
        grid: format!(
            "{} nodes ({} dropped), refinement {} x mesh {:?}",
            process.points(),
            dropped,
            options.grid_mult,
            mesh
        ),
        comparison,
    })
}
