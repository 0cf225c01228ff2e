//! Per-point differential geometry of the normalized manifold
//! `T(x) = l(x)/‖l(x)‖` on the unit sphere.
//!
//! A manifold evaluation is a *jet*: the vector `l(x)` with its first and
//! (optionally) second parameter derivatives, or — when no vector
//! realization is available — the matrix of covariance partial derivatives
//! `∂^a_x ∂^b_{x′} σ(x,x′)` at `x′ = x`, which equals the Gram matrix of the
//! stacked derivative vectors.  Both forms are reduced to a [`Frame`]: the
//! induced metric, volume element, second-fundamental-form inner products,
//! and scalar curvature, plus the boundary and corner quantities needed by
//! the tube-formula integrals.
//!
//! All formulas are written purely in terms of inner products, so the same
//! assembly runs on ambient vectors (Euclidean dot) and on coefficient
//! vectors over the jet basis (Gram-matrix dot).

use crate::error::{CoreError, Result};
use crate::linalg::SymCholesky;

/// How many derivative levels a jet carries (and, for a [`Frame`], how many
/// were consumed: first derivatives give the metric, second derivatives add
/// curvature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    /// `l(x)` only.
    Value,
    /// `l(x)` and first partials — enough for the metric and volume element.
    Tangent,
    /// Second partials too — enough for curvature, boundary traces, wedges.
    Curvature,
}

impl JetOrder {
    /// Number of derivative levels beyond the value itself.
    pub fn derivative_levels(self) -> usize {
        match self {
            JetOrder::Value => 0,
            JetOrder::Tangent => 1,
            JetOrder::Curvature => 2,
        }
    }
}

/// Evaluation of a vector-form manifold at one parameter point: `l(x)` with
/// derivative columns up to the stated order.  Second derivatives are kept
/// symmetric by construction.
#[derive(Debug, Clone)]
pub struct VectorJet {
    n: usize,
    d: usize,
    order: JetOrder,
    l: Vec<f64>,
    dl: Vec<f64>,  // column k occupies [k*n, (k+1)*n)
    ddl: Vec<f64>, // column (i,j) occupies [(i*d+j)*n, ...)
}

impl VectorJet {
    /// Zero-filled jet with `n` ambient coordinates and `d` parameters.
    pub fn new(n: usize, d: usize, order: JetOrder) -> Self {
        assert!(n >= 1 && d >= 1, "jet needs n >= 1 and d >= 1");
        let levels = order.derivative_levels();
        VectorJet {
            n,
            d,
            order,
            l: vec![0.0; n],
            dl: vec![0.0; if levels >= 1 { n * d } else { 0 }],
            ddl: vec![0.0; if levels >= 2 { n * d * d } else { 0 }],
        }
    }

    pub fn ambient_len(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> JetOrder {
        self.order
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn l_mut(&mut self) -> &mut [f64] {
        &mut self.l
    }

    /// First-derivative column `∂l/∂x_k`.
    pub fn dl(&self, k: usize) -> &[f64] {
        &self.dl[k * self.n..(k + 1) * self.n]
    }

    pub fn set_dl(&mut self, i: usize, k: usize, v: f64) {
        self.dl[k * self.n + i] = v;
    }

    /// Second-derivative column `∂²l/∂x_{k1}∂x_{k2}`.
    pub fn ddl(&self, k1: usize, k2: usize) -> &[f64] {
        let c = k1 * self.d + k2;
        &self.ddl[c * self.n..(c + 1) * self.n]
    }

    /// Set `∂²l_i/∂x_{k1}∂x_{k2}`; mixed partials commute, so both index
    /// orders are written.
    pub fn set_ddl(&mut self, i: usize, k1: usize, k2: usize, v: f64) {
        self.ddl[(k1 * self.d + k2) * self.n + i] = v;
        self.ddl[(k2 * self.d + k1) * self.n + i] = v;
    }
}

/// Side length of the covariance-derivative matrix for a given order:
/// 1 (value only), `1 + d` (plus gradient block), or `1 + d + d²` (plus
/// the second-derivative block).
pub fn cov_side(d: usize, order: JetOrder) -> usize {
    match order {
        JetOrder::Value => 1,
        JetOrder::Tangent => 1 + d,
        JetOrder::Curvature => 1 + d + d * d,
    }
}

/// Evaluation of a covariance-form manifold at one parameter point: the
/// matrix with entry `(a, b) = ∂^a_x ∂^b_{x′} σ(x,x′)|_{x′=x}`, where the
/// index runs over the blocks `[none, x_1..x_d, (x_1,x_1), (x_1,x_2), …,
/// (x_d,x_d)]`.  For any vector realization with stacked derivative columns
/// `L = [l, l_1.., l_11..]`, this matrix equals `LᵀL`.
#[derive(Debug, Clone)]
pub struct CovarianceJet {
    d: usize,
    order: JetOrder,
    m: Vec<f64>, // side × side, row-major, symmetrized
}

impl CovarianceJet {
    /// Build from the row-major derivative matrix.  The matrix is
    /// symmetrized; relative asymmetry beyond `1e-6` (usually a sign of an
    /// error in user-supplied derivative code) or a negative diagonal entry
    /// is rejected.
    pub fn from_matrix(d: usize, order: JetOrder, entries: Vec<f64>) -> Result<Self> {
        let side = cov_side(d, order);
        if entries.len() != side * side {
            return Err(CoreError::InvalidCovariance(format!(
                "expected a {side}x{side} derivative matrix ({} entries), got {}",
                side * side,
                entries.len()
            )));
        }
        let scale = entries.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return Err(CoreError::InvalidCovariance(
                "derivative matrix is identically zero".into(),
            ));
        }
        let mut m = entries;
        let mut asym = 0.0f64;
        for a in 0..side {
            for b in a + 1..side {
                let x = m[a * side + b];
                let y = m[b * side + a];
                asym = asym.max((x - y).abs());
                let avg = 0.5 * (x + y);
                m[a * side + b] = avg;
                m[b * side + a] = avg;
            }
        }
        if asym > 1e-6 * scale {
            return Err(CoreError::InvalidCovariance(format!(
                "matrix asymmetry {asym:.3e} exceeds 1e-6 of scale {scale:.3e}; \
                 check the derivative code"
            )));
        }
        for a in 0..side {
            if m[a * side + a] < -1e-9 * scale {
                return Err(CoreError::InvalidCovariance(format!(
                    "diagonal entry {} is {:.3e} < 0; not a Gram matrix",
                    a,
                    m[a * side + a]
                )));
            }
        }
        Ok(CovarianceJet { d, order, m })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> JetOrder {
        self.order
    }

    fn side(&self) -> usize {
        cov_side(self.d, self.order)
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.m[a * self.side() + b]
    }
}

/// Derived geometry of the normalized manifold at one parameter point.
#[derive(Debug, Clone)]
pub struct Frame {
    d: usize,
    valid_order: JetOrder,
    g: Vec<f64>,
    ginv: Vec<f64>,
    sqrt_det_g: f64,
    /// `⟨T_ij, T_a⟩` at `[(i*d + j)*d + a]` (tangential second derivatives).
    chess: Vec<f64>,
    /// `⟨h_ij, h_kl⟩` at `[(i*d + j) * d² + (k*d + l)]`.
    sff: Vec<f64>,
    scalar_curvature: Option<f64>,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Which derivative order the frame was built from (`Tangent` frames
    /// have no curvature data).
    pub fn valid_order(&self) -> JetOrder {
        self.valid_order
    }

    /// Induced metric `g_ij = ⟨T_i, T_j⟩`, row-major `d × d`.
    pub fn metric(&self) -> &[f64] {
        &self.g
    }

    pub fn metric_inverse(&self) -> &[f64] {
        &self.ginv
    }

    /// Volume element `√det g`.
    pub fn sqrt_det_g(&self) -> f64 {
        self.sqrt_det_g
    }

    /// Scalar curvature of the normalized manifold (ambient unit sphere
    /// included); requires a `Curvature`-order frame.
    pub fn scalar_curvature(&self) -> Option<f64> {
        self.scalar_curvature
    }

    /// Second-fundamental-form inner product `⟨h_ij, h_kl⟩`.
    pub fn sff_inner(&self, i: usize, j: usize, k: usize, l: usize) -> Option<f64> {
        if self.valid_order < JetOrder::Curvature {
            return None;
        }
        let d = self.d;
        Some(self.sff[(i * d + j) * d * d + (k * d + l)])
    }
}

/// Geometry of one boundary face at one point: the volume element of the
/// restricted `(d−1)`-manifold and, at curvature order, the trace of its
/// second fundamental form against the inward co-normal (the geodesic
/// curvature for `d = 2`).
#[derive(Debug, Clone)]
pub struct BoundaryFrame {
    face_axis: usize,
    outward: f64,
    face_dim: usize,
    sqrt_det_g: f64,
    curvature_trace: Option<f64>,
}

impl BoundaryFrame {
    pub fn face_axis(&self) -> usize {
        self.face_axis
    }

    pub fn outward(&self) -> f64 {
        self.outward
    }

    pub fn face_dim(&self) -> usize {
        self.face_dim
    }

    /// `√det` of the face metric; `1` for a point (`d = 1`), so endpoint
    /// faces each contribute unit measure.
    pub fn sqrt_det_g(&self) -> f64 {
        self.sqrt_det_g
    }

    /// Trace of the face's second fundamental form against the inward
    /// co-normal (integrand of the boundary curvature term).
    pub fn curvature_trace(&self) -> Option<f64> {
        self.curvature_trace
    }
}

/// Shared frame assembly over an abstract inner-product space.  `l`, `dl`,
/// and `ddl` are representations of the jet vectors (ambient coordinates in
/// vector form, one-hot basis coefficients in covariance form); `dot` is the
/// corresponding inner product.
fn assemble_frame<D>(
    dot: &D,
    l: &[f64],
    dl: &[&[f64]],
    ddl: Option<&[Vec<f64>]>,
    norm_tol: f64,
) -> Result<Frame>
where
    D: Fn(&[f64], &[f64]) -> f64,
{
    let d = dl.len();
    let m = l.len();
    let l2 = dot(l, l);
    if !(l2 > norm_tol * norm_tol) {
        return Err(CoreError::SingularPoint {
            location: Vec::new(),
            detail: format!(
                "‖l‖ = {:.3e} is at or below the tolerance {norm_tol:.3e}",
                l2.max(0.0).sqrt()
            ),
        });
    }
    let big_l = l2.sqrt();
    // T = l/‖l‖ and the tangent vectors T_k = (l_k − (∂_k‖l‖) T)/‖l‖.
    let t: Vec<f64> = l.iter().map(|v| v / big_l).collect();
    let li: Vec<f64> = (0..d).map(|k| dot(dl[k], &t)).collect();
    let ti: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            dl[k]
                .iter()
                .zip(&t)
                .map(|(a, b)| (a - li[k] * b) / big_l)
                .collect()
        })
        .collect();
    let mut g = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let v = dot(&ti[i], &ti[j]);
            g[i * d + j] = v;
            g[j * d + i] = v;
        }
    }
    let max_diag = (0..d).map(|i| g[i * d + i]).fold(f64::MIN, f64::max);
    let deg_tol = 1e-10 * max_diag;
    let ch = SymCholesky::factor(&g, d, deg_tol).map_err(|(axis, pivot)| {
        CoreError::DegenerateMetric {
            location: Vec::new(),
            detail: format!(
                "metric pivot {pivot:.3e} on axis {axis} is at or below tolerance {deg_tol:.3e}; \
                 tangent vectors are linearly dependent"
            ),
        }
    })?;
    let sqrt_det_g = ch.sqrt_det();
    let ginv = ch.inverse();

    let Some(ddl) = ddl else {
        return Ok(Frame {
            d,
            valid_order: JetOrder::Tangent,
            g,
            ginv,
            sqrt_det_g,
            chess: Vec::new(),
            sff: Vec::new(),
            scalar_curvature: None,
        });
    };

    // Second derivatives of T:
    //   ∂_i∂_j ‖l‖ = (⟨l_i, l_j⟩ + ⟨l, l_ij⟩)/‖l‖ − (∂_i‖l‖)(∂_j‖l‖)/‖l‖,
    //   T_ij = l_ij/L − (l_i L_j + l_j L_i)/L² − l·L_ij/L² + 2 l·L_i L_j/L³.
    let mut lij = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let v = (dot(dl[i], dl[j]) + dot(l, &ddl[i * d + j])) / big_l - li[i] * li[j] / big_l;
            lij[i * d + j] = v;
            lij[j * d + i] = v;
        }
    }
    let mut tij: Vec<Vec<f64>> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let c_l = -lij[i * d + j] / l2 + 2.0 * li[i] * li[j] / (l2 * big_l);
            let col = &ddl[i * d + j];
            let v: Vec<f64> = (0..m)
                .map(|r| col[r] / big_l - (dl[i][r] * li[j] + dl[j][r] * li[i]) / l2 + l[r] * c_l)
                .collect();
            tij.push(v);
        }
    }
    // Tangential components ⟨T_ij, T_a⟩ and the normal second fundamental
    // form h_ij = T_ij + g_ij T − Σ_a (g⁻¹ ⟨T_ij, T_·⟩)_a T_a: project T_ij
    // off the radial direction (∂T is orthogonal to T, but curvature of the
    // sphere enters as +g_ij T) and off the tangent space via the metric.
    let mut chess = vec![0.0; d * d * d];
    for p in 0..d * d {
        for a in 0..d {
            chess[p * d + a] = dot(&tij[p], &ti[a]);
        }
    }
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let p = i * d + j;
            let b: Vec<f64> = (0..d)
                .map(|c| (0..d).map(|a| ginv[c * d + a] * chess[p * d + a]).sum())
                .collect();
            let v: Vec<f64> = (0..m)
                .map(|r| {
                    let tangential: f64 = (0..d).map(|c| b[c] * ti[c][r]).sum();
                    tij[p][r] + g[p] * t[r] - tangential
                })
                .collect();
            h.push(v);
        }
    }
    let dd = d * d;
    let mut sff = vec![0.0; dd * dd];
    for p in 0..dd {
        for q in p..dd {
            let v = dot(&h[p], &h[q]);
            sff[p * dd + q] = v;
            sff[q * dd + p] = v;
        }
    }
    // Gauss equation with unit-sphere ambient:
    //   R_ikjl = ⟨h_ik, h_jl⟩ − ⟨h_il, h_jk⟩ + (g_ik g_jl − g_il g_jk),
    // contracted twice with g⁻¹; the ambient part contributes d(d−1).
    let mut term1 = 0.0;
    let mut term2 = 0.0;
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l_ in 0..d {
                    let w = ginv[i * d + k] * ginv[j * d + l_];
                    term1 += w * sff[(i * d + k) * dd + (j * d + l_)];
                    term2 += w * sff[(i * d + l_) * dd + (j * d + k)];
                }
            }
        }
    }
    let rho = term1 - term2 + (d * (d - 1)) as f64;

    Ok(Frame {
        d,
        valid_order: JetOrder::Curvature,
        g,
        ginv,
        sqrt_det_g,
        chess,
        sff,
        scalar_curvature: Some(rho),
    })
}

/// Build a [`Frame`] from a vector-form jet.  `order` selects how much
/// geometry to compute and must not exceed what the jet carries; at least
/// first derivatives are required to define a metric.
pub fn frame_from_vector(jet: &VectorJet, order: JetOrder) -> Result<Frame> {
    if order == JetOrder::Value {
        return Err(CoreError::InvalidArgument(
            "a frame requires at least first derivatives (order Tangent)".into(),
        ));
    }
    if jet.order() < order {
        return Err(CoreError::InvalidArgument(format!(
            "jet carries {:?} derivatives but {order:?} was requested",
            jet.order()
        )));
    }
    let d = jet.dim();
    let dl: Vec<&[f64]> = (0..d).map(|k| jet.dl(k)).collect();
    let ddl: Option<Vec<Vec<f64>>> = if order >= JetOrder::Curvature {
        Some((0..d * d).map(|p| jet.ddl(p / d, p % d).to_vec()).collect())
    } else {
        None
    };
    let norm_tol = 1e-12 * (jet.ambient_len() as f64).sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    assemble_frame(&dot, jet.l(), &dl, ddl.as_deref(), norm_tol)
}

/// Build a [`Frame`] from a covariance-form jet.  The computation runs the
/// same assembly as the vector route, but on coefficient vectors over the
/// jet basis `{l, l_1.., l_11..}` with the Gram matrix as inner product, so
/// no vector realization is ever constructed.
pub fn frame_from_covariance(jet: &CovarianceJet, order: JetOrder) -> Result<Frame> {
    if order == JetOrder::Value {
        return Err(CoreError::InvalidArgument(
            "a frame requires at least first derivatives (order Tangent)".into(),
        ));
    }
    if jet.order() < order {
        return Err(CoreError::InvalidArgument(format!(
            "covariance jet carries {:?} derivatives but {order:?} was requested",
            jet.order()
        )));
    }
    let d = jet.dim();
    let side = jet.side();
    let one_hot = |idx: usize| {
        let mut v = vec![0.0; side];
        v[idx] = 1.0;
        v
    };
    let l = one_hot(0);
    let dl_owned: Vec<Vec<f64>> = (1..=d).map(one_hot).collect();
    let dl: Vec<&[f64]> = dl_owned.iter().map(Vec::as_slice).collect();
    let ddl: Option<Vec<Vec<f64>>> = if order >= JetOrder::Curvature {
        Some((0..d * d).map(|p| one_hot(1 + d + p)).collect())
    } else {
        None
    };
    let norm_tol = 1e-12 * (side as f64).sqrt();
    let m = &jet.m;
    let dot = move |a: &[f64], b: &[f64]| {
        let mut s = 0.0;
        for (r, &ar) in a.iter().enumerate() {
            if ar == 0.0 {
                continue;
            }
            let row = &m[r * side..(r + 1) * side];
            s += ar * row.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        s
    };
    assemble_frame(&dot, &l, &dl, ddl.as_deref(), norm_tol)
}

/// Restrict a frame to the boundary face obtained by fixing `face_axis`,
/// with `outward = ±1` the outward direction along that axis.  Returns the
/// face volume element and (at curvature order) the trace of the face's
/// second fundamental form against the inward co-normal.
pub fn boundary_frame(frame: &Frame, face_axis: usize, outward: f64) -> Result<BoundaryFrame> {
    let d = frame.dim();
    if face_axis >= d {
        return Err(CoreError::InvalidArgument(format!(
            "face axis {face_axis} out of range for dimension {d}"
        )));
    }
    if outward != 1.0 && outward != -1.0 {
        return Err(CoreError::InvalidArgument(
            "outward sign must be +1 or -1".into(),
        ));
    }
    let free: Vec<usize> = (0..d).filter(|&a| a != face_axis).collect();
    let df = free.len();
    if df == 0 {
        // A face of a curve is a point: unit measure, no curvature.
        return Ok(BoundaryFrame {
            face_axis,
            outward,
            face_dim: 0,
            sqrt_det_g: 1.0,
            curvature_trace: if frame.valid_order() >= JetOrder::Curvature {
                Some(0.0)
            } else {
                None
            },
        });
    }
    let g = frame.metric();
    let mut gf = vec![0.0; df * df];
    for (ia, &a) in free.iter().enumerate() {
        for (ib, &b) in free.iter().enumerate() {
            gf[ia * df + ib] = g[a * d + b];
        }
    }
    let max_diag = (0..df).map(|i| gf[i * df + i]).fold(f64::MIN, f64::max);
    let tol = 1e-10 * max_diag;
    let ch =
        SymCholesky::factor(&gf, df, tol).map_err(|(axis, pivot)| CoreError::DegenerateMetric {
            location: Vec::new(),
            detail: format!(
                "face metric pivot {pivot:.3e} on face axis {axis} is at or below {tol:.3e}"
            ),
        })?;
    let sqrt_det_gf = ch.sqrt_det();
    let curvature_trace = if frame.valid_order() >= JetOrder::Curvature {
        // Inward co-normal coefficients in the tangent basis:
        //   ν = −outward · g⁻¹ e_k / √((g⁻¹)_kk);
        // the trace is Σ_{a,b free} (g_F⁻¹)_ab ⟨T_ab, ν⟩.
        let ginv = frame.metric_inverse();
        let scale = ginv[face_axis * d + face_axis].sqrt();
        let nu: Vec<f64> = (0..d)
            .map(|c| -outward * ginv[c * d + face_axis] / scale)
            .collect();
        let gfinv = ch.inverse();
        let mut tr = 0.0;
        for (ia, &a) in free.iter().enumerate() {
            for (ib, &b) in free.iter().enumerate() {
                let normal_component: f64 = (0..d)
                    .map(|c| frame.chess[(a * d + b) * d + c] * nu[c])
                    .sum();
                tr += gfinv[ia * df + ib] * normal_component;
            }
        }
        Some(tr)
    } else {
        None
    };
    Ok(BoundaryFrame {
        face_axis,
        outward,
        face_dim: df,
        sqrt_det_g: sqrt_det_gf,
        curvature_trace,
    })
}

/// Wedge (exterior) angle at the corner where the faces of `axis1` and
/// `axis2` meet: the angle between the two outward co-normals under the
/// metric, `arccos(s₁s₂ (g⁻¹)_{k₁k₂} / √((g⁻¹)_{k₁k₁}(g⁻¹)_{k₂k₂}))`,
/// equal to π minus the interior angle between the two edges.
pub fn wedge_angle(
    frame: &Frame,
    axis1: usize,
    outward1: f64,
    axis2: usize,
    outward2: f64,
) -> Result<f64> {
    let d = frame.dim();
    if d < 2 || axis1 >= d || axis2 >= d || axis1 == axis2 {
        return Err(CoreError::InvalidArgument(format!(
            "wedge angle needs two distinct axes below the dimension, got {axis1}, {axis2} in d = {d}"
        )));
    }
    let ginv = frame.metric_inverse();
    let c = outward1 * outward2 * ginv[axis1 * d + axis2]
        / (ginv[axis1 * d + axis1] * ginv[axis2 * d + axis2]).sqrt();
    Ok(c.clamp(-1.0, 1.0).acos())
}
