//! Score test for a contaminated-null mixture alternative.
//!
//! Observations `X_1, ..., X_n` carry a null density `f0`.  The
//! alternative mixes in a parametric contaminant `phi(x, lambda)`, and
//! the centered score process
//!
//! ```text
//! S(lambda) = sum_i [ phi(X_i, lambda)/f0(X_i) - 1 ]
//! ```
//!
//! is scanned over `lambda`.  Under the null, `S(lambda)/sqrt(n *
//! sigma(lambda, lambda))` converges to a unit-variance Gaussian process
//! whose supremum tail follows from the tube constants of the covariance
//! `sigma(a, b) = Cov(phi(X,a)/f0(X), phi(X,b)/f0(X))`.
//!
//! The shipped family is the standard normal null with a unit-variance
//! normal location contaminant, whose covariance `exp(a*b) - 1` gets
//! dedicated series handling around the gauge singularity at zero.

use crate::error::{CoreError, Result};
use crate::geometry::{cov_side, CovarianceJet, JetOrder, VectorJet};
use crate::manifold::{EvalMode, Manifold};
use crate::prob::{critval, tailp, ProcessSpec, Side, TailProbability};
use crate::quadrature::DomainRect;
use crate::tube::{tube_constants, TubeConstants, TubeOptions};

use super::{sup_1d, Dataset};

/// A score-test family: the likelihood-ratio kernel of the contaminant
/// against the null, and the covariance structure of the score process.
pub trait ScoreFamily: Sync {
    /// `phi(x, lambda) / f0(x)`.
    fn density_ratio(&self, x: f64, lambda: f64) -> f64;

    /// `phi(x, lambda) / f0(x) - 1`, overridable when the difference can
    /// be formed without cancellation.
    fn centered_ratio(&self, x: f64, lambda: f64) -> f64 {
        self.density_ratio(x, lambda) - 1.0
    }

    /// Score covariance `sigma(a, b)` under the null.
    fn covariance(&self, a: f64, b: f64) -> f64;

    /// On-diagonal derivative jet of the covariance.  Implementations may
    /// return the jet in a smoothly rescaled gauge (for example
    /// `sigma / (a*b)` near a zero of `sigma`); every quantity derived
    /// from the jet by the tube machinery is invariant under such
    /// rescalings.
    fn covariance_jet(&self, lambda: f64, order: JetOrder) -> Result<CovarianceJet>;

    /// Boundary mass the scan domain hides from the integrator, added to
    /// the face coefficient of the tube series.  The default is zero.
    fn hidden_boundary_increment(&self, _domain: &DomainRect) -> f64 {
        0.0
    }
}

impl<F: ScoreFamily + ?Sized> ScoreFamily for &F {
    fn density_ratio(&self, x: f64, lambda: f64) -> f64 {
        (**self).density_ratio(x, lambda)
    }
    fn centered_ratio(&self, x: f64, lambda: f64) -> f64 {
        (**self).centered_ratio(x, lambda)
    }
    fn covariance(&self, a: f64, b: f64) -> f64 {
        (**self).covariance(a, b)
    }
    fn covariance_jet(&self, lambda: f64, order: JetOrder) -> Result<CovarianceJet> {
        (**self).covariance_jet(lambda, order)
    }
    fn hidden_boundary_increment(&self, domain: &DomainRect) -> f64 {
        (**self).hidden_boundary_increment(domain)
    }
}

/// Standard normal null contaminated by a unit-variance normal located
/// at `lambda`: density ratio `exp(lambda x - lambda^2 / 2)`, score
/// covariance `exp(a b) - 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalLocation;

/// Below this the covariance jet switches to its series branch.
const SERIES_THRESHOLD: f64 = 0.01;

impl NormalLocation {
    /// Direct evaluation of the covariance jet of `exp(mu^2) - 1`.
    fn direct_jet(mu: f64) -> [f64; 9] {
        let mm = mu * mu;
        let e = mm.exp();
        let s01 = mu * e;
        let s02 = mm * e;
        let s12 = (2.0 * mu + mu * mm) * e;
        [
            mm.exp_m1(),
            s01,
            s02,
            s01,
            (1.0 + mm) * e,
            s12,
            s02,
            s12,
            (2.0 + 4.0 * mm + mm * mm) * e,
        ]
    }

    /// Series evaluation of the jet in the de-singularized gauge
    /// `sigma(a, b) / (a b)`, accurate to well below 1e-15 for
    /// `|mu| <= 0.01`.  The gauge is smooth and positive at zero, where
    /// the raw covariance vanishes.
    fn series_jet(mu: f64) -> [f64; 9] {
        let mm = mu * mu;
        let s00 = 1.0 + mm / 2.0 * (1.0 + mm / 3.0 * (1.0 + mm / 4.0 * (1.0 + mm / 5.0)));
        let s01 = mu
            * 0.5
            * (1.0 + mm / 3.0 * (2.0 + mm / 4.0 * (3.0 + mm / 5.0 * (4.0 + 5.0 * mm / 6.0))));
        let s11 =
            0.5 * (1.0 + mm / 3.0 * (4.0 + mm / 4.0 * (9.0 + mm / 5.0 * (16.0 + 25.0 * mm / 6.0))));
        let s02 = mm * (1.0 / 3.0 + mm * (0.25 + mm * (0.1 + mm * (1.0 / 36.0 + mm / 168.0))));
        let s12 = mu * (2.0 / 3.0 + mm * (0.75 + mm * (0.4 + mm * (5.0 / 36.0 + mm / 28.0))));
        let s22 = 2.0 / 3.0 + mm * (1.5 + mm * (1.2 + mm * (5.0 / 9.0 + mm * 5.0 / 28.0)));
        [s00, s01, s02, s01, s11, s12, s02, s12, s22]
    }

    fn jet_entries(mu: f64) -> [f64; 9] {
        if mu.abs() < SERIES_THRESHOLD {
            Self::series_jet(mu)
        } else {
            Self::direct_jet(mu)
        }
    }

    /// A finite vector realization of the same process for
    /// cross-validation: coordinates `mu^{k-1} / sqrt(k!)`, `k = 1..=terms`,
    /// in the same smooth gauge as the series branch.  The Gram matrix of
    /// this curve reproduces `sigma(a, b)/(a b)` up to the series
    /// truncation error.
    pub fn power_basis(terms: usize) -> Result<PowerBasisCurve> {
        if terms < 3 {
            return Err(CoreError::InvalidArgument(
                "the power-basis realization needs at least three terms".into(),
            ));
        }
        let mut coeff = Vec::with_capacity(terms);
        let mut factorial = 1.0f64;
        for k in 1..=terms {
            factorial *= k as f64;
            coeff.push(1.0 / factorial.sqrt());
        }
        Ok(PowerBasisCurve { coeff })
    }
}

impl ScoreFamily for NormalLocation {
    fn density_ratio(&self, x: f64, lambda: f64) -> f64 {
        (lambda * x - 0.5 * lambda * lambda).exp()
    }

    fn centered_ratio(&self, x: f64, lambda: f64) -> f64 {
        (lambda * x - 0.5 * lambda * lambda).exp_m1()
    }

    fn covariance(&self, a: f64, b: f64) -> f64 {
        (a * b).exp_m1()
    }

    fn covariance_jet(&self, lambda: f64, order: JetOrder) -> Result<CovarianceJet> {
        let full = Self::jet_entries(lambda);
        let side = cov_side(1, order);
        let mut m = vec![0.0; side * side];
        for a in 0..side {
            for b in 0..side {
                m[a * side + b] = full[a * 3 + b];
            }
        }
        CovarianceJet::from_matrix(1, order, m)
    }

    /// The scanned process is two smooth arcs meeting at the gauge zero
    /// `lambda = 0`; when the scan window contains zero in its interior
    /// the integrator sees neither of the two arc endpoints there, so two
    /// extra faces (each of unit measure, contributing 1/2 apiece) are
    /// added.
    fn hidden_boundary_increment(&self, domain: &DomainRect) -> f64 {
        let interior_zero = domain
            .segments(0)
            .iter()
            .any(|&(lo, hi)| lo < 0.0 && 0.0 < hi);
        if interior_zero {
            1.0
        } else {
            0.0
        }
    }
}

/// The vector-form cross-check curve from [`NormalLocation::power_basis`].
#[derive(Debug, Clone)]
pub struct PowerBasisCurve {
    coeff: Vec<f64>,
}

impl Manifold for PowerBasisCurve {
    fn dim(&self) -> usize {
        1
    }

    fn supports(&self, mode: EvalMode) -> bool {
        matches!(mode, EvalMode::Vector)
    }

    fn vector_jet(&self, x: &[f64], order: JetOrder) -> Result<VectorJet> {
        if x.len() != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "expected 1 coordinate, found {}",
                x.len()
            )));
        }
        let mu = x[0];
        let n = self.coeff.len();
        let mut jet = VectorJet::new(n, 1, order);
        // Powers mu^{i-2}, mu^{i-1}, mu^i maintained incrementally; the
        // negative exponents never get used because their factors vanish.
        let mut p_prev2 = 0.0;
        let mut p_prev = 0.0;
        let mut p = 1.0;
        for (i, &c) in self.coeff.iter().enumerate() {
            jet.l_mut()[i] = c * p;
            if order >= JetOrder::Tangent {
                jet.set_dl(i, 0, c * i as f64 * p_prev);
            }
            if order >= JetOrder::Curvature {
                jet.set_ddl(i, 0, 0, c * (i * i.saturating_sub(1)) as f64 * p_prev2);
            }
            p_prev2 = p_prev;
            p_prev = p;
            p *= mu;
        }
        Ok(jet)
    }
}

/// A score family viewed as a covariance-form manifold over its scan
/// parameter.
#[derive(Debug, Clone, Copy)]
pub struct ScoreManifold<F> {
    family: F,
}

impl<F: ScoreFamily> ScoreManifold<F> {
    pub fn new(family: F) -> Self {
        Self { family }
    }
}

impl<F: ScoreFamily> Manifold for ScoreManifold<F> {
    fn dim(&self) -> usize {
        1
    }

    fn supports(&self, mode: EvalMode) -> bool {
        matches!(mode, EvalMode::Covariance)
    }

    fn covariance_jet(&self, x: &[f64], order: JetOrder) -> Result<CovarianceJet> {
        if x.len() != 1 {
            return Err(CoreError::InvalidArgument(format!(
                "expected 1 coordinate, found {}",
                x.len()
            )));
        }
        self.family.covariance_jet(x[0], order)
    }

    fn covariance_between(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != 1 || y.len() != 1 {
            return Err(CoreError::InvalidArgument(
                "expected 1 coordinate per point".into(),
            ));
        }
        Ok(self.family.covariance(x[0], y[0]))
    }
}

/// Outcome of the score scan test.
#[derive(Debug, Clone)]
pub struct ScoreTestReport {
    /// Supremum of the normalized score over the scan window.
    pub statistic: f64,
    /// Scan parameter attaining the supremum.
    pub best_lambda: f64,
    /// One-sided Gaussian critical value at `alpha`.
    pub critical_value: f64,
    /// Requested level.
    pub alpha: f64,
    /// True when `statistic > critical_value`.
    pub reject: bool,
    /// Exceedance probability of the observed statistic, when positive.
    pub p_value: Option<TailProbability>,
    /// Tube constants of the scan manifold (including any hidden
    /// boundary mass).
    pub constants: TubeConstants,
}

/// Runs the score scan test for `family` on univariate data over the
/// window `domain` at level `alpha`, with `mesh` Simpson subintervals
/// for the tube constants.
pub fn score_test<F: ScoreFamily>(
    family: &F,
    data: &Dataset,
    domain: &DomainRect,
    alpha: f64,
    mesh: &[usize],
) -> Result<ScoreTestReport> {
    let xs = data.xs()?;
    if mesh.len() != 1 {
        return Err(CoreError::InvalidArgument(format!(
            "scan expects one mesh entry, found {}",
            mesh.len()
        )));
    }
    let manifold = ScoreManifold::new(family);
    let options = TubeOptions {
        mesh: mesh.to_vec(),
        boundary_increment: family.hidden_boundary_increment(domain),
        ..TubeOptions::new(EvalMode::Covariance)
    };
    let constants = tube_constants(&manifold, domain, &options)?;
    let spec = ProcessSpec::gaussian(Side::OneSided);
    let critical_value = critval(alpha, &constants, &spec)?;
    let n = xs.len() as f64;
    let (best_lambda, statistic) = sup_1d(domain, 4 * mesh[0], 1e-10, |lambda| {
        let var = family.covariance(lambda, lambda);
        if !var.is_finite() || var <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let s: f64 = xs.iter().map(|&x| family.centered_ratio(x, lambda)).sum();
        Ok(s / (n * var).sqrt())
    })?;
    let p_value = if statistic > 0.0 {
        Some(tailp(statistic, &constants, &spec)?)
    } else {
        None
    };
    Ok(ScoreTestReport {
        statistic,
        best_lambda,
        critical_value,
        alpha,
        reject: statistic > critical_value,
        p_value,
        constants,
    })
}

/// The shipped normal-location instance of [`score_test`].
pub fn normal_mixture_test(
    data: &Dataset,
    domain: &DomainRect,
    alpha: f64,
    mesh: &[usize],
) -> Result<ScoreTestReport> {
    score_test(&NormalLocation, data, domain, alpha, mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame_from_covariance;

    fn frame_of(entries: [f64; 9]) -> crate::geometry::Frame {
        let jet = CovarianceJet::from_matrix(1, JetOrder::Curvature, entries.to_vec()).unwrap();
        frame_from_covariance(&jet, JetOrder::Curvature).unwrap()
    }

    #[test]
    fn direct_jet_closed_values_at_one() {
        let e = std::f64::consts::E;
        let m = NormalLocation::direct_jet(1.0);
        assert!((m[0] - (e - 1.0)).abs() <= 1e-14);
        assert!((m[1] - e).abs() <= 1e-14);
        assert!((m[2] - e).abs() <= 1e-14);
        assert!((m[4] - 2.0 * e).abs() <= 1e-14);
        assert!((m[5] - 3.0 * e).abs() <= 1e-14);
        assert!((m[8] - 7.0 * e).abs() <= 2e-14);
    }

    #[test]
    fn branches_induce_the_same_geometry_at_the_switch() {
        for mu in [SERIES_THRESHOLD, -SERIES_THRESHOLD] {
            let direct = frame_of(NormalLocation::direct_jet(mu));
            let series = frame_of(NormalLocation::series_jet(mu));
            assert!(
                (direct.metric()[0] - series.metric()[0]).abs() <= 1e-12,
                "metric at {mu}: {} vs {}",
                direct.metric()[0],
                series.metric()[0]
            );
            assert!((direct.sqrt_det_g() - series.sqrt_det_g()).abs() <= 1e-12);
            assert!(
                (direct.scalar_curvature().unwrap() - series.scalar_curvature().unwrap()).abs()
                    <= 1e-6,
                "curvature at {mu}"
            );
        }
    }

    #[test]
    fn metric_matches_closed_form() {
        // Normalized-process metric: g = E (E - 1 - mu^2) / (E - 1)^2
        // with E = exp(mu^2).
        for mu in [0.5, 1.0, 2.0] {
            let jet = NormalLocation
                .covariance_jet(mu, JetOrder::Curvature)
                .unwrap();
            let frame = frame_from_covariance(&jet, JetOrder::Curvature).unwrap();
            let e = (mu * mu).exp();
            let want = e * (e - 1.0 - mu * mu) / ((e - 1.0) * (e - 1.0));
            assert!(
                (frame.metric()[0] - want).abs() <= 1e-12 * want,
                "mu = {mu}: {} vs {want}",
                frame.metric()[0]
            );
        }
        // Gauge limit at zero.
        let jet = NormalLocation
            .covariance_jet(0.0, JetOrder::Curvature)
            .unwrap();
        let frame = frame_from_covariance(&jet, JetOrder::Curvature).unwrap();
        assert!((frame.metric()[0] - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn jet_entries_have_definite_parity() {
        for mu in [0.7, 0.004] {
            let plus = NormalLocation::jet_entries(mu);
            let minus = NormalLocation::jet_entries(-mu);
            // sigma block and pure-even derivative entries.
            for idx in [0, 2, 4, 6, 8] {
                assert!((plus[idx] - minus[idx]).abs() <= 1e-15 * (1.0 + plus[idx].abs()));
            }
            // odd-order entries flip sign.
            for idx in [1, 3, 5, 7] {
                assert!((plus[idx] + minus[idx]).abs() <= 1e-15 * (1.0 + plus[idx].abs()));
            }
        }
    }

    #[test]
    fn hidden_boundary_counts_interior_zero_only() {
        let family = NormalLocation;
        let whole = DomainRect::new(&[(-3.0, 3.0)]).unwrap();
        assert_eq!(family.hidden_boundary_increment(&whole), 1.0);
        let positive = DomainRect::new(&[(0.5, 3.0)]).unwrap();
        assert_eq!(family.hidden_boundary_increment(&positive), 0.0);
        let punctured = DomainRect::new(&[(-3.0, 3.0)])
            .unwrap()
            .with_exclusion(0, -0.1, 0.1)
            .unwrap();
        assert_eq!(family.hidden_boundary_increment(&punctured), 0.0);
    }

    #[test]
    fn scan_constants_match_reference_values() {
        let domain = DomainRect::new(&[(-3.0, 3.0)]).unwrap();
        let manifold = ScoreManifold::new(NormalLocation);
        let options = TubeOptions {
            mesh: vec![200],
            boundary_increment: 1.0,
            ..TubeOptions::new(EvalMode::Covariance)
        };
        let constants = tube_constants(&manifold, &domain, &options).unwrap();
        assert!(
            (constants.kap()[0] - 5.27449060615).abs() <= 5e-4,
            "kappa0 = {}",
            constants.kap()[0]
        );
        assert!((constants.kap()[1] - 2.0).abs() <= 1e-12);
        let c = critval(0.05, &constants, &ProcessSpec::gaussian(Side::OneSided)).unwrap();
        assert!((c - 2.49455363768).abs() <= 5e-4, "critical value {c}");
    }

    #[test]
    fn vector_realization_matches_covariance_route() {
        let domain = DomainRect::new(&[(-3.0, 3.0)]).unwrap();
        let curve = NormalLocation::power_basis(50).unwrap();
        let vec_opts = TubeOptions {
            mesh: vec![40],
            ..TubeOptions::new(EvalMode::Vector)
        };
        let cov_opts = TubeOptions {
            mesh: vec![40],
            ..TubeOptions::new(EvalMode::Covariance)
        };
        let a = tube_constants(&curve, &domain, &vec_opts).unwrap();
        let b = tube_constants(&ScoreManifold::new(NormalLocation), &domain, &cov_opts).unwrap();
        for (ka, kb) in a.kap().iter().zip(b.kap()) {
            assert!((ka - kb).abs() <= 1e-8 * (1.0 + kb.abs()), "{ka} vs {kb}");
        }
    }

    #[test]
    fn shifted_sample_rejects_and_null_sample_does_not() {
        let domain = DomainRect::new(&[(-3.0, 3.0)]).unwrap();
        let shifted = Dataset::univariate(vec![2.0, 2.5, 1.5, 3.0, 2.2], None).unwrap();
        let report = normal_mixture_test(&shifted, &domain, 0.05, &[200]).unwrap();
        assert!(report.reject, "statistic {}", report.statistic);
        assert!(report.statistic > report.critical_value);
        let p = report.p_value.expect("positive statistic").value;
        assert!(p < 0.05, "p = {p}");

        let nullish = Dataset::univariate(vec![0.1, -0.2, 0.05, -0.1, 0.15, -0.05], None).unwrap();
        let report = normal_mixture_test(&nullish, &domain, 0.05, &[200]).unwrap();
        assert!(!report.reject, "statistic {}", report.statistic);
    }

    #[test]
    fn power_basis_gram_reproduces_the_gauge_covariance() {
        let curve = NormalLocation::power_basis(50).unwrap();
        for (a, b) in [(0.5, 1.5), (-2.0, 3.0), (0.01, -0.01)] {
            let ja = curve.vector_jet(&[a], JetOrder::Value).unwrap();
            let jb = curve.vector_jet(&[b], JetOrder::Value).unwrap();
            let gram: f64 = ja.l().iter().zip(jb.l()).map(|(u, v)| u * v).sum();
            let want = (a * b).exp_m1() / (a * b);
            assert!(
                (gram - want).abs() <= 1e-12 * (1.0 + want.abs()),
                "({a},{b}): {gram} vs {want}"
            );
        }
    }
}
