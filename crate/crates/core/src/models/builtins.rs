//! Ready-made example manifolds with known geometry, used for validation
//! and exposed through the command-line interface.

use crate::geometry::{JetOrder, VectorJet};
use crate::manifold::{Manifold, VectorManifoldFn};

/// Great circle `l(γ) = (cos γ, sin γ, 0)` of the unit sphere in `R³`.
/// On `[a, b]` this is an arc of length `b − a`; on a periodic domain of
/// length `2π` it is the full circle.
pub fn great_circle_arc() -> impl Manifold {
    VectorManifoldFn::new(1, |x: &[f64], order| {
        let g = x[0];
        let mut jet = VectorJet::new(3, 1, order);
        jet.l_mut()[0] = g.cos();
        jet.l_mut()[1] = g.sin();
        if order >= JetOrder::Tangent {
            jet.set_dl(0, 0, -g.sin());
            jet.set_dl(1, 0, g.cos());
        }
        if order >= JetOrder::Curvature {
            jet.set_ddl(0, 0, 0, -g.cos());
            jet.set_ddl(1, 0, 0, -g.sin());
        }
        Ok(jet)
    })
}

/// Flat torus patch `T(x, y) = (cos x, sin x, cos y, sin y)/√2` in `R⁴`
/// (a piece of the Clifford torus in `S³`): metric `g = I/2`, intrinsically
/// flat, coordinate lines geodesic, right-angle corners.
pub fn clifford_torus_patch() -> impl Manifold {
    VectorManifoldFn::new(2, |x: &[f64], order| {
        let s = 0.5f64.sqrt();
        let (a, b) = (x[0], x[1]);
        let mut jet = VectorJet::new(4, 2, order);
        jet.l_mut()
            .copy_from_slice(&[s * a.cos(), s * a.sin(), s * b.cos(), s * b.sin()]);
        if order >= JetOrder::Tangent {
            jet.set_dl(0, 0, -s * a.sin());
            jet.set_dl(1, 0, s * a.cos());
            jet.set_dl(2, 1, -s * b.sin());
            jet.set_dl(3, 1, s * b.cos());
        }
        if order >= JetOrder::Curvature {
            jet.set_ddl(0, 0, 0, -s * a.cos());
            jet.set_ddl(1, 0, 0, -s * a.sin());
            jet.set_ddl(2, 1, 1, -s * b.cos());
            jet.set_ddl(3, 1, 1, -s * b.sin());
        }
        Ok(jet)
    })
}

/// Central-projection chart of the unit sphere: `l(x, y) = (1, x, y)`, so
/// `T = l/‖l‖` covers the open upper hemisphere of `S²`.  Volume element
/// `(1 + x² + y²)^{−3/2}`, scalar curvature 2.
pub fn sphere_central_chart() -> impl Manifold {
    VectorManifoldFn::new(2, |x: &[f64], order| {
        let mut jet = VectorJet::new(3, 2, order);
        jet.l_mut().copy_from_slice(&[1.0, x[0], x[1]]);
        if order >= JetOrder::Tangent {
            jet.set_dl(1, 0, 1.0);
            jet.set_dl(2, 1, 1.0);
        }
        // All second derivatives vanish; the curvature comes entirely from
        // the normalization.
        Ok(jet)
    })
}

/// Polar chart of the unit sphere:
/// `l(θ, φ) = (sin θ cos φ, sin θ sin φ, cos θ)`.
pub fn sphere_polar_chart() -> impl Manifold {
    VectorManifoldFn::new(2, |x: &[f64], order| {
        let (st, ct) = (x[0].sin(), x[0].cos());
        let (sp, cp) = (x[1].sin(), x[1].cos());
        let mut jet = VectorJet::new(3, 2, order);
        jet.l_mut().copy_from_slice(&[st * cp, st * sp, ct]);
        if order >= JetOrder::Tangent {
            for (i, v) in [ct * cp, ct * sp, -st].iter().enumerate() {
                jet.set_dl(i, 0, *v);
            }
            for (i, v) in [-st * sp, st * cp, 0.0].iter().enumerate() {
                jet.set_dl(i, 1, *v);
            }
        }
        if order >= JetOrder::Curvature {
            for (i, v) in [-st * cp, -st * sp, -ct].iter().enumerate() {
                jet.set_ddl(i, 0, 0, *v);
            }
            for (i, v) in [-ct * sp, ct * cp, 0.0].iter().enumerate() {
                jet.set_ddl(i, 0, 1, *v);
            }
            for (i, v) in [-st * cp, -st * sp, 0.0].iter().enumerate() {
                jet.set_ddl(i, 1, 1, *v);
            }
        }
        Ok(jet)
    })
}

/// Three-dimensional flat torus chart
/// `T(x, y, z) = (cos x, sin x, cos y, sin y, cos z, sin z)/√3` in `R⁶`:
/// the `d = 3` analogue of the Clifford patch, with `g = I/3`, zero
/// curvature, geodesic faces, and right-angle edges.
pub fn flat_torus_chart() -> impl Manifold {
    VectorManifoldFn::new(3, |x: &[f64], order| {
        let s = (1.0f64 / 3.0).sqrt();
        let mut jet = VectorJet::new(6, 3, order);
        for (k, &xk) in x.iter().enumerate() {
            let (sk, ck) = (xk.sin(), xk.cos());
            jet.l_mut()[2 * k] = s * ck;
            jet.l_mut()[2 * k + 1] = s * sk;
            if order >= JetOrder::Tangent {
                jet.set_dl(2 * k, k, -s * sk);
                jet.set_dl(2 * k + 1, k, s * ck);
            }
            if order >= JetOrder::Curvature {
                jet.set_ddl(2 * k, k, k, -s * ck);
                jet.set_ddl(2 * k + 1, k, k, -s * sk);
            }
        }
        Ok(jet)
    })
}

/// The result type is kept flexible for callers that need trait objects.
pub fn boxed(name: &str) -> Option<Box<dyn Manifold>> {
    match name {
        "arc" | "circle" => Some(Box::new(great_circle_arc())),
        "clifford" => Some(Box::new(clifford_torus_patch())),
        "gnomonic" => Some(Box::new(sphere_central_chart())),
        "polar" => Some(Box::new(sphere_polar_chart())),
        "torus3" => Some(Box::new(flat_torus_chart())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{frame_at, EvalMode};

    #[test]
    fn builtin_dimensions() {
        assert_eq!(great_circle_arc().dim(), 1);
        assert_eq!(clifford_torus_patch().dim(), 2);
        assert_eq!(sphere_central_chart().dim(), 2);
        assert_eq!(sphere_polar_chart().dim(), 2);
        assert_eq!(flat_torus_chart().dim(), 3);
    }

    #[test]
    fn charts_agree_where_they_overlap() {
        // Central and polar charts parameterize the same sphere: compare
        // the volume of a small region computed in both charts via the
        // pointwise volume elements at matching points.
        let central = sphere_central_chart();
        let polar = sphere_polar_chart();
        // Point (x, y) = (0.3, 0.4) ↔ (θ, φ) with tan θ = r, tan φ = y/x.
        let (x, y) = (0.3f64, 0.4f64);
        let r = (x * x + y * y).sqrt();
        let th = r.atan();
        let ph = y.atan2(x);
        let fc = frame_at(&central, &[x, y], JetOrder::Curvature, EvalMode::Vector).unwrap();
        let fp = frame_at(&polar, &[th, ph], JetOrder::Curvature, EvalMode::Vector).unwrap();
        // Both charts see scalar curvature 2 at the same sphere point.
        assert!((fc.scalar_curvature().unwrap() - 2.0).abs() <= 1e-10);
        assert!((fp.scalar_curvature().unwrap() - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn torus_chart_is_flat() {
        let m = flat_torus_chart();
        let fr = frame_at(&m, &[0.4, 1.0, 2.2], JetOrder::Curvature, EvalMode::Vector).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((fr.metric()[i * 3 + j] - want).abs() <= 1e-14);
            }
        }
        assert!(fr.scalar_curvature().unwrap().abs() <= 1e-10);
    }

    #[test]
    fn name_lookup() {
        assert!(boxed("clifford").is_some());
        assert!(boxed("nope").is_none());
        assert_eq!(boxed("torus3").unwrap().dim(), 3);
    }
}
