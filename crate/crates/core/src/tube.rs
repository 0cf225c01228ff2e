//! Tube-formula constants and closed-form tube volumes.
//!
//! The central object is the coefficient vector
//! `kap = [κ0, l0/2, (κ2 + l1 + m0)/(2π), (l2 + m1 + n0)/(4π)]`
//! of the volume-of-tubes series, truncated to `min(d + 1, terms, 4)`
//! entries.  The pieces are geometric invariants of the normalized manifold:
//! `κ0` its volume, `l0` the volume of its boundary, `κ2` half the
//! integrated scalar curvature, `l1` the integrated boundary curvature
//! trace, and `m0` the integrated corner wedge angle.

use crate::error::{CoreError, Result};
use crate::geometry::{boundary_frame, wedge_angle, JetOrder};
use crate::linalg::SymCholesky;
use crate::manifold::{frame_at, EvalMode, Manifold};
use crate::quadrature::{
    integrate_corners, integrate_faces_many, integrate_rect_many, simpson_intervals, DomainRect,
};
use crate::specfun::{ball_volume, beta_tail, sphere_area};

/// Options controlling [`tube_constants`].
#[derive(Debug, Clone)]
pub struct TubeOptions {
    /// Evaluation route (vector or covariance form).
    pub mode: EvalMode,
    /// Requested number of series coefficients (1..=4).  `None` computes
    /// every coefficient available for the dimension without warnings.
    pub terms: Option<usize>,
    /// Simpson subintervals per axis; a single entry applies to all axes.
    pub mesh: Vec<usize>,
    /// Amount added to the boundary coefficient `kap[1]`, for manifolds
    /// whose closure has boundary pieces the parameter rectangle does not
    /// see (e.g. both sides of an interior singularity).
    pub boundary_increment: f64,
    /// For `d ≥ 3`, close the series by setting the fourth coefficient to
    /// the Euler characteristic of the domain.  This extends the proven
    /// pattern `kap[last] = χ` from `d ≤ 2` and must be validated per
    /// model by simulation; the result is flagged in the breakdown.
    pub euler_closure: bool,
}

impl TubeOptions {
    pub fn new(mode: EvalMode) -> Self {
        TubeOptions {
            mode,
            terms: None,
            mesh: vec![100],
            boundary_increment: 0.0,
            euler_closure: false,
        }
    }
}

/// Per-piece values behind the series coefficients.
#[derive(Debug, Clone)]
pub struct Breakdown {
    /// Manifold volume `κ0 = ∫ √det g`.
    pub kappa0: f64,
    /// Boundary volume `l0 = Σ_faces ∫ √det g_F` (before halving, without
    /// the manual increment).
    pub l0: f64,
    /// The manual boundary increment applied to `kap[1]`.
    pub boundary_increment: f64,
    /// Curvature integral `κ2 = ½ ∫ ρ dV` when third-order terms were
    /// computed.
    pub kappa2: Option<f64>,
    /// Boundary curvature-trace integral `l1`.
    pub l1: Option<f64>,
    /// Corner wedge-angle integral `m0`.
    pub m0: Option<f64>,
    /// Euler characteristic installed as the final coefficient, when the
    /// heuristic closure was requested.
    pub euler_term: Option<f64>,
}

/// The tube-formula coefficient vector for one manifold.
#[derive(Debug, Clone)]
pub struct TubeConstants {
    dim: usize,
    kap: Vec<f64>,
    breakdown: Option<Breakdown>,
    warnings: Vec<String>,
}

impl TubeConstants {
    /// Wrap an externally obtained coefficient vector (e.g. parsed from a
    /// file) so it can be fed to the probability routines.
    pub fn from_parts(dim: usize, kap: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::InvalidArgument(
                "manifold dimension must be at least 1".into(),
            ));
        }
        let max_len = (dim + 1).min(4);
        if kap.is_empty() || kap.len() > max_len {
            return Err(CoreError::InvalidArgument(format!(
                "a dimension-{dim} manifold has between 1 and {max_len} coefficients, got {}",
                kap.len()
            )));
        }
        if !(kap[0] > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "leading coefficient (manifold volume) must be positive, got {}",
                kap[0]
            )));
        }
        if kap.len() > 1 && kap[1] < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "boundary coefficient must be non-negative, got {}",
                kap[1]
            )));
        }
        if kap.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "coefficients must be finite".into(),
            ));
        }
        Ok(TubeConstants {
            dim,
            kap,
            breakdown: None,
            warnings: Vec::new(),
        })
    }

    /// Manifold dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The series coefficients.
    pub fn kap(&self) -> &[f64] {
        &self.kap
    }

    /// Per-piece values, when produced by [`tube_constants`].
    pub fn breakdown(&self) -> Option<&Breakdown> {
        self.breakdown.as_ref()
    }

    /// Non-fatal notes accumulated during computation (mesh rounding,
    /// truncation of the requested number of terms, …).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Expand the mesh specification to one entry per axis and normalize each
/// entry to an even count of at least 2, recording a warning on change.
fn resolve_mesh(mesh: &[usize], d: usize, warnings: &mut Vec<String>) -> Result<Vec<usize>> {
    let raw: Vec<usize> = if mesh.len() == d {
        mesh.to_vec()
    } else if mesh.len() == 1 {
        vec![mesh[0]; d]
    } else {
        return Err(CoreError::InvalidArgument(format!(
            "mesh must have 1 or {d} entries, got {}",
            mesh.len()
        )));
    };
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(axis, mg)| {
            let norm = simpson_intervals(mg);
            if norm != mg {
                warnings.push(format!(
                    "mesh {mg} on axis {axis} adjusted to {norm} (Simpson needs an even count >= 2)"
                ));
            }
            norm
        })
        .collect())
}

/// `√det` of the metric restricted to the corner's free axes (the measure
/// on the codimension-two corner manifold); 1 when there are none.
fn corner_measure(g: &[f64], d: usize, k1: usize, k2: usize) -> Result<f64> {
    let free: Vec<usize> = (0..d).filter(|&a| a != k1 && a != k2).collect();
    if free.is_empty() {
        return Ok(1.0);
    }
    let df = free.len();
    let mut gc = vec![0.0; df * df];
    for (ia, &a) in free.iter().enumerate() {
        for (ib, &b) in free.iter().enumerate() {
            gc[ia * df + ib] = g[a * d + b];
        }
    }
    let max_diag = (0..df).map(|i| gc[i * df + i]).fold(f64::MIN, f64::max);
    let tol = 1e-10 * max_diag;
    let ch =
        SymCholesky::factor(&gc, df, tol).map_err(|(axis, pivot)| CoreError::DegenerateMetric {
            location: Vec::new(),
            detail: format!(
                "corner metric pivot {pivot:.3e} on free axis {axis} is at or below {tol:.3e}"
            ),
        })?;
    Ok(ch.sqrt_det())
}

/// Numerically evaluate the tube-series coefficients of a manifold over a
/// rectangle domain.
pub fn tube_constants<M: Manifold + ?Sized>(
    manifold: &M,
    domain: &DomainRect,
    options: &TubeOptions,
) -> Result<TubeConstants> {
    let d = domain.dim();
    if manifold.dim() != d {
        return Err(CoreError::InvalidArgument(format!(
            "manifold dimension {} does not match domain dimension {d}",
            manifold.dim()
        )));
    }
    if !manifold.supports(options.mode) {
        return Err(CoreError::UnsupportedMode(format!(
            "manifold does not support {:?} evaluation",
            options.mode
        )));
    }

    let mut warnings = Vec::new();
    let max_terms = (d + 1).min(if options.euler_closure { 4 } else { 3 });
    let terms = match options.terms {
        None => max_terms,
        Some(t) => {
            if t == 0 || t > 4 {
                return Err(CoreError::InvalidArgument(format!(
                    "terms must be between 1 and 4, got {t}"
                )));
            }
            if t > (d + 1).min(4) {
                warnings.push(format!(
                    "requested {t} coefficients but dimension {d} has only {}; truncating",
                    (d + 1).min(4)
                ));
            } else if t > max_terms {
                warnings.push(
                    "fourth coefficient is computed only under the Euler-characteristic \
                     closure; truncating to 3"
                        .into(),
                );
            }
            t.min(max_terms)
        }
    };
    if options.euler_closure && d < 3 {
        warnings.push(format!(
            "Euler-characteristic closure applies only to d >= 3 (d = {d}); all \
             coefficients are computed directly"
        ));
    }
    let mesh = resolve_mesh(&options.mesh, d, &mut warnings)?;
    let order = if terms >= 3 {
        JetOrder::Curvature
    } else {
        JetOrder::Tangent
    };
    let mode = options.mode;

    // Interior integrals: volume element alone, or together with ½ρ per
    // node when curvature is needed.
    let (kappa0, kappa2) = if terms >= 3 {
        let [v, c] = integrate_rect_many(domain, &mesh, |x| {
            let fr = frame_at(manifold, x, order, mode)?;
            let sd = fr.sqrt_det_g();
            let rho = fr.scalar_curvature().expect("curvature-order frame");
            Ok([sd, 0.5 * rho * sd])
        })?;
        (v, Some(c))
    } else {
        let [v] = integrate_rect_many(domain, &mesh, |x| {
            let fr = frame_at(manifold, x, order, mode)?;
            Ok([fr.sqrt_det_g()])
        })?;
        (v, None)
    };

    // Boundary integrals over the faces.
    let (l0, l1) = if terms >= 3 {
        let [v, t] = integrate_faces_many(domain, &mesh, |face, x| {
            let fr = frame_at(manifold, x, order, mode)?;
            let bf = boundary_frame(&fr, face.axis, face.outward).map_err(|e| e.at_node(x))?;
            let sd = bf.sqrt_det_g();
            let tr = bf.curvature_trace().expect("curvature-order frame");
            Ok([sd, tr * sd])
        })?;
        (Some(v), Some(t))
    } else if terms >= 2 {
        let [v] = integrate_faces_many(domain, &mesh, |face, x| {
            let fr = frame_at(manifold, x, order, mode)?;
            let bf = boundary_frame(&fr, face.axis, face.outward).map_err(|e| e.at_node(x))?;
            Ok([bf.sqrt_det_g()])
        })?;
        (Some(v), None)
    } else {
        (None, None)
    };

    // Corner integral of the wedge angle.
    let m0 = if terms >= 3 && d >= 2 {
        Some(integrate_corners(domain, &mesh, |corner, x| {
            let fr = frame_at(manifold, x, order, mode)?;
            let (k1, k2) = corner.axes;
            let (s1, s2) = corner.outwards;
            let angle = wedge_angle(&fr, k1, s1, k2, s2).map_err(|e| e.at_node(x))?;
            let measure = corner_measure(fr.metric(), d, k1, k2).map_err(|e| e.at_node(x))?;
            Ok(angle * measure)
        })?)
    } else if terms >= 3 {
        Some(0.0) // d = 1 has no corners
    } else {
        None
    };

    let mut kap = Vec::with_capacity(terms);
    kap.push(kappa0);
    if terms >= 2 {
        kap.push(0.5 * l0.expect("face integral") + options.boundary_increment);
    }
    if terms >= 3 {
        let k2 = kappa2.expect("interior curvature integral");
        let b1 = l1.expect("boundary trace integral");
        let w0 = m0.expect("corner integral");
        kap.push((k2 + b1 + w0) / (2.0 * std::f64::consts::PI));
    }
    let euler_term = if terms >= 4 {
        let chi = domain.euler_characteristic() as f64;
        kap.push(chi);
        Some(chi)
    } else {
        None
    };
    if options.boundary_increment != 0.0 && terms < 2 {
        warnings
            .push("boundary increment ignored because only one coefficient was computed".into());
    }

    Ok(TubeConstants {
        dim: d,
        kap,
        breakdown: Some(Breakdown {
            kappa0,
            l0: l0.unwrap_or(0.0),
            boundary_increment: options.boundary_increment,
            kappa2,
            l1,
            m0,
            euler_term,
        }),
        warnings,
    })
}

/// Volume of the two-sided tube of radius `r` around a one-dimensional
/// manifold of volume `κ0` with `l0` boundary points, embedded in `R^n`:
/// `κ0 V_{n−1} r^{n−1} + (l0/2) V_n r^n` with `V_k` the unit-ball volume.
pub fn euclidean_tube_volume(kappa0: f64, l0: f64, n: usize, r: f64) -> Result<f64> {
    if !(kappa0 > 0.0) || !(l0 >= 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "need kappa0 > 0 and l0 >= 0, got {kappa0}, {l0}"
        )));
    }
    if n < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "ambient dimension must be at least 2, got {n}"
        )));
    }
    if !(r > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "tube radius must be positive, got {r}"
        )));
    }
    Ok(kappa0 * ball_volume(n - 1) * r.powi(n as i32 - 1)
        + 0.5 * l0 * ball_volume(n) * r.powi(n as i32))
}

/// Surface volume of the spherical tube `{u ∈ S^{n−1} : ⟨u, T(x)⟩ ≥ w for
/// some x}` around a `d`-dimensional manifold, by the coefficient series:
/// `Σ_k kap[k] (A_n / A_{d+1−k}) P(B_{(d+1−k)/2, (n−d−1+k)/2} ≥ w²)`.
/// `w = 1 − r²/2` relates the cap height to the geodesic tube radius.
pub fn spherical_tube_volume(constants: &TubeConstants, n: usize, w: f64) -> Result<f64> {
    let d = constants.dim();
    if n <= d + 1 {
        return Err(CoreError::InvalidArgument(format!(
            "ambient dimension {n} must exceed manifold dimension + 1 = {}",
            d + 1
        )));
    }
    if !(w > 0.0 && w <= 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "cap height w must lie in (0, 1], got {w}"
        )));
    }
    let area_n = sphere_area(n);
    let mut total = 0.0;
    for (k, &coeff) in constants.kap().iter().enumerate() {
        let j = d + 1 - k; // effective dimension of the k-th piece
        let a = j as f64 / 2.0;
        let b = (n - j) as f64 / 2.0;
        let tail = beta_tail(a, b, w * w)?.value();
        total += coeff * (area_n / sphere_area(j)) * tail;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::VectorJet;
    use crate::manifold::VectorManifoldFn;
    use crate::models::builtins;
    use std::f64::consts::PI;

    fn arc_domain(lo: f64, hi: f64) -> DomainRect {
        DomainRect::new(&[(lo, hi)]).unwrap()
    }

    fn options(mode: EvalMode, mesh: &[usize]) -> TubeOptions {
        let mut o = TubeOptions::new(mode);
        o.mesh = mesh.to_vec();
        o
    }

    #[test]
    fn unit_arc_constants() {
        // An arc of length 1 with two endpoints: kap = [1, 1].
        let m = builtins::great_circle_arc();
        let c =
            tube_constants(&m, &arc_domain(0.0, 1.0), &options(EvalMode::Vector, &[20])).unwrap();
        assert_eq!(c.kap().len(), 2);
        assert!((c.kap()[0] - 1.0).abs() <= 1e-12);
        assert!((c.kap()[1] - 1.0).abs() <= 1e-12);
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn periodic_circle_has_no_boundary() {
        let m = builtins::great_circle_arc();
        let dom = DomainRect::new(&[(0.0, 2.0 * PI)])
            .unwrap()
            .with_periodic(0)
            .unwrap();
        let c = tube_constants(&m, &dom, &options(EvalMode::Vector, &[40])).unwrap();
        assert_eq!(c.kap().len(), 2);
        assert!((c.kap()[0] - 2.0 * PI).abs() <= 1e-12);
        assert_eq!(c.kap()[1], 0.0);
    }

    #[test]
    fn clifford_patch_constants_closed_form() {
        // Flat patch: √det g = 1/2, faces √det g_F = 1/√2, right angles.
        // kap = [π²/8, π/√2, 1], and Simpson is exact on constants.
        let m = builtins::clifford_torus_patch();
        let dom = DomainRect::new(&[(0.0, PI / 2.0), (0.0, PI / 2.0)]).unwrap();
        let c = tube_constants(&m, &dom, &options(EvalMode::Vector, &[8])).unwrap();
        assert_eq!(c.kap().len(), 3);
        assert!((c.kap()[0] - PI * PI / 8.0).abs() <= 1e-12);
        assert!((c.kap()[1] - PI / 2.0f64.sqrt()).abs() <= 1e-12);
        assert!((c.kap()[2] - 1.0).abs() <= 1e-12);
        let br = c.breakdown().unwrap();
        assert!((br.m0.unwrap() - 2.0 * PI).abs() <= 1e-12);
        assert!(br.kappa2.unwrap().abs() <= 1e-10);
        assert!(br.l1.unwrap().abs() <= 1e-10);
    }

    #[test]
    fn curved_charts_close_at_euler_characteristic() {
        // The third coefficient of an injective d = 2 patch equals the
        // Euler characteristic 1 of the rectangle, by the Gauss–Bonnet
        // theorem; here on two genuinely curved charts of the sphere.
        let central = builtins::sphere_central_chart();
        let dom = DomainRect::new(&[(-0.8, 0.7), (-0.5, 0.9)]).unwrap();
        let c = tube_constants(&central, &dom, &options(EvalMode::Vector, &[40])).unwrap();
        assert!(
            (c.kap()[2] - 1.0).abs() <= 1e-6,
            "central chart closure: {}",
            c.kap()[2]
        );

        let polar = builtins::sphere_polar_chart();
        let dom = DomainRect::new(&[(0.3, 1.2), (0.0, 2.0)]).unwrap();
        let c = tube_constants(&polar, &dom, &options(EvalMode::Vector, &[40])).unwrap();
        assert!(
            (c.kap()[2] - 1.0).abs() <= 1e-6,
            "polar chart closure: {}",
            c.kap()[2]
        );
        // Cross-check one piece in closed form: the polar-cap boundary
        // θ = 1.2 contributes ∮ k_g = 2 cos(1.2) − 2 cos(0.3) together with
        // the θ = 0.3 face.
        let br = c.breakdown().unwrap();
        let expected_l1 = 2.0 * (1.2f64.cos() - 0.3f64.cos());
        assert!((br.l1.unwrap() - expected_l1).abs() <= 1e-9);
    }

    #[test]
    fn random_smooth_patch_closes_at_euler_characteristic() {
        let m = crate::testutil::trig_manifold(5, 2, 0x5eed);
        let dom = DomainRect::new(&[(-0.4, 0.5), (-0.3, 0.6)]).unwrap();
        let c = tube_constants(&m, &dom, &options(EvalMode::Vector, &[40])).unwrap();
        assert!(
            (c.kap()[2] - 1.0).abs() <= 1e-4,
            "random patch closure: {}",
            c.kap()[2]
        );
    }

    #[test]
    fn vector_and_covariance_routes_agree() {
        let d = 2;
        let vector = crate::testutil::trig_manifold(5, d, 0xabc);
        let covariance = crate::testutil::trig_manifold_covariance(5, d, 0xabc);
        let dom = DomainRect::new(&[(-0.4, 0.5), (-0.3, 0.6)]).unwrap();
        let cv = tube_constants(&vector, &dom, &options(EvalMode::Vector, &[12])).unwrap();
        let cc = tube_constants(&covariance, &dom, &options(EvalMode::Covariance, &[12])).unwrap();
        assert_eq!(cv.kap().len(), cc.kap().len());
        for (a, b) in cv.kap().iter().zip(cc.kap()) {
            assert!((a - b).abs() <= 1e-10, "route mismatch: {a} vs {b}");
        }
    }

    #[test]
    fn reparameterization_leaves_constants_invariant() {
        // γ = u³ on an adjusted domain leaves κ0 invariant (chain rule).
        let base = crate::testutil::trig_manifold(4, 1, 77);
        let composed = VectorManifoldFn::new(1, move |x: &[f64], order| {
            let u = x[0];
            let inner = crate::testutil::trig_manifold(4, 1, 77);
            let jet = inner.vector_jet(&[u * u * u], order)?;
            let mut out = VectorJet::new(4, 1, order);
            let (p1, p2) = (3.0 * u * u, 6.0 * u);
            for i in 0..4 {
                out.l_mut()[i] = jet.l()[i];
                if order >= JetOrder::Tangent {
                    out.set_dl(i, 0, jet.dl(0)[i] * p1);
                }
                if order >= JetOrder::Curvature {
                    out.set_ddl(i, 0, 0, jet.ddl(0, 0)[i] * p1 * p1 + jet.dl(0)[i] * p2);
                }
            }
            Ok(out)
        });
        let lo = 0.2f64;
        let hi = 1.1f64;
        let a = tube_constants(
            &base,
            &arc_domain(lo, hi),
            &options(EvalMode::Vector, &[400]),
        )
        .unwrap();
        let b = tube_constants(
            &composed,
            &arc_domain(lo.cbrt(), hi.cbrt()),
            &options(EvalMode::Vector, &[400]),
        )
        .unwrap();
        assert!(
            (a.kap()[0] - b.kap()[0]).abs() <= 2e-6,
            "kappa0 {} vs {}",
            a.kap()[0],
            b.kap()[0]
        );
        // Endpoint count is invariant exactly.
        assert!((a.kap()[1] - b.kap()[1]).abs() <= 1e-12);
    }

    #[test]
    fn boundary_increment_adds_to_second_coefficient() {
        let m = builtins::great_circle_arc();
        let mut o = options(EvalMode::Vector, &[10]);
        o.boundary_increment = 1.0;
        let c = tube_constants(&m, &arc_domain(0.0, 1.0), &o).unwrap();
        assert!((c.kap()[1] - 2.0).abs() <= 1e-12);
        assert_eq!(c.breakdown().unwrap().boundary_increment, 1.0);
        // The raw face integral is still recorded unincremented.
        assert!((c.breakdown().unwrap().l0 - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn explicit_term_requests_clamp_with_warning() {
        let m = builtins::great_circle_arc();
        let mut o = options(EvalMode::Vector, &[10]);
        o.terms = Some(3);
        let c = tube_constants(&m, &arc_domain(0.0, 1.0), &o).unwrap();
        assert_eq!(c.kap().len(), 2);
        assert!(!c.warnings().is_empty());
        o.terms = Some(0);
        assert!(tube_constants(&m, &arc_domain(0.0, 1.0), &o).is_err());
        o.terms = Some(5);
        assert!(tube_constants(&m, &arc_domain(0.0, 1.0), &o).is_err());
    }

    #[test]
    fn fourth_coefficient_needs_euler_closure() {
        let m = builtins::flat_torus_chart();
        let dom = DomainRect::new(&[(0.0, 1.2); 3]).unwrap();
        let mut o = options(EvalMode::Vector, &[6]);
        o.terms = Some(4);
        let c = tube_constants(&m, &dom, &o).unwrap();
        assert_eq!(c.kap().len(), 3);
        assert!(!c.warnings().is_empty());

        o.euler_closure = true;
        let c = tube_constants(&m, &dom, &o).unwrap();
        assert_eq!(c.kap().len(), 4);
        assert_eq!(c.kap()[3], 1.0);
        assert_eq!(c.breakdown().unwrap().euler_term, Some(1.0));
    }

    #[test]
    fn flat_torus_chart_constants() {
        // T(x,y,z) = (cos x, sin x, …, sin z)/√3: √det g = 3^{−3/2}, six
        // faces with √det g_F = 1/3, flat interior and geodesic faces, and
        // twelve edges of wedge angle π/2 and measure 1/√3 per unit length.
        let a = 1.2f64;
        let m = builtins::flat_torus_chart();
        let dom = DomainRect::new(&[(0.0, a); 3]).unwrap();
        let c = tube_constants(&m, &dom, &options(EvalMode::Vector, &[6])).unwrap();
        let vol = a.powi(3) * 3.0f64.powf(-1.5);
        let faces = 6.0 * a * a / 3.0;
        let edges = 12.0 * (PI / 2.0) * a / 3.0f64.sqrt();
        assert!((c.kap()[0] - vol).abs() <= 1e-12);
        assert!((c.kap()[1] - 0.5 * faces).abs() <= 1e-12);
        assert!((c.kap()[2] - edges / (2.0 * PI)).abs() <= 1e-10);
    }

    #[test]
    fn singular_node_reports_coordinates() {
        // l(x) = (u, u²) with u = x − 1/2 vanishes at the mid node while the
        // normalized direction still varies everywhere else.
        let m = VectorManifoldFn::new(1, |x: &[f64], order| {
            let u = x[0] - 0.5;
            let mut jet = VectorJet::new(2, 1, order);
            jet.l_mut().copy_from_slice(&[u, u * u]);
            if order >= JetOrder::Tangent {
                jet.set_dl(0, 0, 1.0);
                jet.set_dl(1, 0, 2.0 * u);
            }
            if order >= JetOrder::Curvature {
                jet.set_ddl(1, 0, 0, 2.0);
            }
            Ok(jet)
        });
        match tube_constants(&m, &arc_domain(0.0, 1.0), &options(EvalMode::Vector, &[2])) {
            Err(CoreError::SingularPoint { location, .. }) => {
                assert_eq!(location, vec![0.5]);
            }
            other => panic!("expected a located singular point, got {other:?}"),
        }
    }

    #[test]
    fn wrong_mode_is_rejected() {
        let m = builtins::great_circle_arc();
        let res = tube_constants(
            &m,
            &arc_domain(0.0, 1.0),
            &options(EvalMode::Covariance, &[4]),
        );
        assert!(matches!(res, Err(CoreError::UnsupportedMode(_))));
    }

    #[test]
    fn odd_mesh_is_rounded_with_warning() {
        let m = builtins::great_circle_arc();
        let c =
            tube_constants(&m, &arc_domain(0.0, 1.0), &options(EvalMode::Vector, &[5])).unwrap();
        assert!((c.kap()[0] - 1.0).abs() <= 1e-12);
        assert!(c.warnings().iter().any(|w| w.contains("adjusted to 6")));
    }

    #[test]
    fn constants_from_parts_validation() {
        assert!(TubeConstants::from_parts(1, vec![1.0, 1.0]).is_ok());
        assert!(TubeConstants::from_parts(1, vec![]).is_err());
        assert!(TubeConstants::from_parts(1, vec![1.0, 1.0, 0.5]).is_err()); // too many for d=1
        assert!(TubeConstants::from_parts(1, vec![-1.0, 1.0]).is_err());
        assert!(TubeConstants::from_parts(1, vec![1.0, -0.5]).is_err());
        assert!(TubeConstants::from_parts(2, vec![1.0, 0.0, -0.3]).is_ok()); // curvature may be negative
    }

    #[test]
    fn euclidean_tube_closed_forms() {
        // Length 1, two endpoints, in the plane: strip + end caps.
        let v = euclidean_tube_volume(1.0, 2.0, 2, 0.1).unwrap();
        assert!((v - (0.2 + 0.01 * PI)).abs() <= 1e-15);
        // Closed curve of length 2π in the plane: annulus area 2·2π·r.
        let v = euclidean_tube_volume(2.0 * PI, 0.0, 2, 0.5).unwrap();
        assert!((v - 2.0 * PI).abs() <= 1e-12);
        // Closed curve of length 2π in R³: solid torus 2π · πr².
        let v = euclidean_tube_volume(2.0 * PI, 0.0, 3, 0.5).unwrap();
        assert!((v - 2.0 * PI * PI * 0.25).abs() <= 1e-12);
        assert!(euclidean_tube_volume(0.0, 0.0, 2, 0.1).is_err());
        assert!(euclidean_tube_volume(1.0, 0.0, 1, 0.1).is_err());
        assert!(euclidean_tube_volume(1.0, 0.0, 2, 0.0).is_err());
    }

    #[test]
    fn spherical_tube_matches_band_plus_caps() {
        // Tube of geodesic radius θ around a unit-length arc on S²: band of
        // area 2 sin θ plus two half caps of combined area 2π(1 − cos θ).
        let constants = TubeConstants::from_parts(1, vec![1.0, 1.0]).unwrap();
        for &theta in &[0.2f64, 0.5, 1.0] {
            let w = theta.cos();
            let v = spherical_tube_volume(&constants, 3, w).unwrap();
            let exact = 2.0 * theta.sin() + 2.0 * PI * (1.0 - theta.cos());
            assert!((v - exact).abs() <= 1e-12, "theta = {theta}");
        }
    }

    #[test]
    fn spherical_tube_full_circle_band() {
        // Periodic great circle: the tube is the band |polar angle| < θ of
        // area 4π sin θ; θ = π/6 gives 2π.
        let constants = TubeConstants::from_parts(1, vec![2.0 * PI, 0.0]).unwrap();
        let theta = PI / 6.0;
        let v = spherical_tube_volume(&constants, 3, theta.cos()).unwrap();
        assert!((v - 2.0 * PI).abs() <= 1e-12);
        // Zero radius: w = 1 gives an empty tube.
        let v = spherical_tube_volume(&constants, 3, 1.0).unwrap();
        assert!(v.abs() <= 1e-300);
        // Ambient dimension must exceed d + 1.
        assert!(spherical_tube_volume(&constants, 2, 0.5).is_err());
        assert!(spherical_tube_volume(&constants, 3, 0.0).is_err());
        assert!(spherical_tube_volume(&constants, 3, 1.5).is_err());
    }
}
