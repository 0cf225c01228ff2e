//! Composite-Simpson quadrature over axis-aligned boxes whose axes may be
//! periodic (circle-valued) and may have open slabs excluded.
//!
//! A [`DomainRect`] is a product of per-axis pieces.  Each non-periodic axis
//! contributes its endpoints as boundary faces; each exclusion contributes a
//! pair of internal faces.  Periodic axes identify their endpoints and so
//! contribute no outer faces.  Faces of two distinct axes intersect in
//! codimension-two corners.  The integration routines evaluate an integrand
//! over the interior, the faces, or the corners with tensor-product Simpson
//! rules, splitting each axis budget across its kept segments.

use crate::error::{CoreError, Result};
use rayon::prelude::*;

/// One axis of the domain.
#[derive(Debug, Clone)]
struct Axis {
    lo: f64,
    hi: f64,
    periodic: bool,
    /// Disjoint, sorted open intervals removed from `(lo, hi)`.
    exclusions: Vec<(f64, f64)>,
    /// Closed kept segments, in increasing order.
    segments: Vec<(f64, f64)>,
}

impl Axis {
    fn rebuild_segments(&mut self) {
        let mut segs = Vec::with_capacity(self.exclusions.len() + 1);
        let mut cursor = self.lo;
        for &(a, b) in &self.exclusions {
            segs.push((cursor, a));
            cursor = b;
        }
        segs.push((cursor, self.hi));
        self.segments = segs;
    }
}

/// Product domain: a box with optional exclusions and periodic axes.
#[derive(Debug, Clone)]
pub struct DomainRect {
    axes: Vec<Axis>,
}

/// A codimension-one boundary face: the slice `x[axis] = value`, with
/// `outward = ±1` giving the direction of the outward normal along that axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub value: f64,
    pub outward: f64,
}

/// A codimension-two corner: the intersection of one face from each of two
/// distinct axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub axes: (usize, usize),
    pub values: (f64, f64),
    pub outwards: (f64, f64),
}

impl DomainRect {
    /// Box with the given `(lo, hi)` bounds per axis.
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(CoreError::InvalidArgument(
                "domain must have at least one axis".into(),
            ));
        }
        let axes = bounds
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi))| {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(CoreError::InvalidArgument(format!(
                        "axis {k}: bounds must be finite with lo < hi, got [{lo}, {hi}]"
                    )));
                }
                let mut ax = Axis {
                    lo,
                    hi,
                    periodic: false,
                    exclusions: Vec::new(),
                    segments: Vec::new(),
                };
                ax.rebuild_segments();
                Ok(ax)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DomainRect { axes })
    }

    /// Mark an axis as periodic: its endpoints are identified and produce no
    /// boundary faces.
    pub fn with_periodic(mut self, axis: usize) -> Result<Self> {
        self.check_axis(axis)?;
        self.axes[axis].periodic = true;
        Ok(self)
    }

    /// Remove the open slab `a < x[axis] < b` from the domain.  The slab must
    /// lie strictly inside the axis bounds and must not overlap an existing
    /// exclusion.
    pub fn with_exclusion(mut self, axis: usize, a: f64, b: f64) -> Result<Self> {
        self.check_axis(axis)?;
        let ax = &mut self.axes[axis];
        if !(a.is_finite() && b.is_finite() && ax.lo < a && a < b && b < ax.hi) {
            return Err(CoreError::InvalidArgument(format!(
                "axis {axis}: exclusion ({a}, {b}) must satisfy {} < a < b < {}",
                ax.lo, ax.hi
            )));
        }
        if ax.exclusions.iter().any(|&(ea, eb)| a <= eb && ea <= b) {
            return Err(CoreError::InvalidArgument(format!(
                "axis {axis}: exclusion ({a}, {b}) overlaps an existing exclusion"
            )));
        }
        ax.exclusions.push((a, b));
        ax.exclusions.sort_by(|x, y| x.0.total_cmp(&y.0));
        ax.rebuild_segments();
        Ok(self)
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.axes.len() {
            return Err(CoreError::InvalidArgument(format!(
                "axis index {axis} out of range for a {}-dimensional domain",
                self.axes.len()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        (self.axes[axis].lo, self.axes[axis].hi)
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.axes[axis].periodic
    }

    /// Kept closed segments of an axis, in increasing order.
    pub fn segments(&self, axis: usize) -> &[(f64, f64)] {
        &self.axes[axis].segments
    }

    /// Euler characteristic of the domain.  Each non-periodic axis is a
    /// disjoint union of `e + 1` intervals (characteristic `e + 1`); each
    /// periodic axis with `e` exclusions is `e` arcs, or the full circle
    /// (characteristic 0) when `e = 0`.  The characteristic of the product
    /// is the product of the factors.
    pub fn euler_characteristic(&self) -> i64 {
        self.axes
            .iter()
            .map(|ax| {
                let e = ax.exclusions.len() as i64;
                if ax.periodic {
                    e
                } else {
                    e + 1
                }
            })
            .product()
    }

    /// Face positions of one axis as `(value, outward)` pairs.
    fn face_positions(&self, axis: usize) -> Vec<(f64, f64)> {
        let ax = &self.axes[axis];
        let m = ax.segments.len();
        let mut out = Vec::new();
        for (i, &(a, b)) in ax.segments.iter().enumerate() {
            // Lower edge of a segment looks outward in the -e_k direction.
            if i > 0 || !ax.periodic {
                out.push((a, -1.0));
            }
            if i + 1 < m || !ax.periodic {
                out.push((b, 1.0));
            }
        }
        out
    }

    /// All boundary faces of the domain.
    pub fn faces(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            for (value, outward) in self.face_positions(axis) {
                out.push(Face {
                    axis,
                    value,
                    outward,
                });
            }
        }
        out
    }

    /// All codimension-two corners (empty when the domain is 1-dimensional).
    pub fn corners(&self) -> Vec<Corner> {
        let d = self.dim();
        let mut out = Vec::new();
        for k1 in 0..d {
            let faces1 = self.face_positions(k1);
            for k2 in k1 + 1..d {
                let faces2 = self.face_positions(k2);
                for &(v1, s1) in &faces1 {
                    for &(v2, s2) in &faces2 {
                        out.push(Corner {
                            axes: (k1, k2),
                            values: (v1, v2),
                            outwards: (s1, s2),
                        });
                    }
                }
            }
        }
        out
    }

    /// Composite Simpson nodes and weights along one axis, with the interval
    /// budget `mg` split across segments proportionally to length (at least
    /// two, rounded up to even, per segment).
    pub(crate) fn axis_rule(&self, axis: usize, mg: usize) -> Vec<(f64, f64)> {
        let ax = &self.axes[axis];
        let total: f64 = ax.segments.iter().map(|&(a, b)| b - a).sum();
        let mg = simpson_intervals(mg) as f64;
        let mut rule = Vec::new();
        for &(a, b) in &ax.segments {
            let share = (mg * (b - a) / total).round() as usize;
            let m = simpson_intervals(share);
            let seg = simpson_rule(a, b, m);
            rule.extend(seg.nodes.iter().copied().zip(seg.weights.iter().copied()));
        }
        rule
    }
}

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Round an interval count up to the nearest even number, with a floor of 2.
/// Composite Simpson requires an even number of intervals.
pub fn simpson_intervals(requested: usize) -> usize {
    let m = requested.max(2);
    if m % 2 == 0 {
        m
    } else {
        m + 1
    }
}

/// Composite Simpson rule with `intervals` subintervals on `[a, b]`.
pub fn simpson_rule(a: f64, b: f64, intervals: usize) -> QuadRule {
    let m = simpson_intervals(intervals);
    let h = (b - a) / m as f64;
    let nodes: Vec<f64> = (0..=m).map(|j| a + h * j as f64).collect();
    let weights: Vec<f64> = (0..=m)
        .map(|j| {
            let c = if j == 0 || j == m {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    QuadRule { nodes, weights }
}

/// Tensor-product integration over the given per-axis rules.  With no axes
/// the "integral" is a single evaluation at the empty point with unit weight.
/// Work is parallelized over the first axis; partial sums are accumulated in
/// index order so the result does not depend on thread scheduling.
fn tensor_integrate<const N: usize, F>(rules: &[Vec<(f64, f64)>], f: F) -> Result<[f64; N]>
where
    F: Fn(&[f64]) -> Result<[f64; N]> + Sync,
{
    if rules.is_empty() {
        return f(&[]);
    }
    let inner_count: usize = rules[1..].iter().map(Vec::len).product();
    let slabs: Vec<Result<[f64; N]>> = rules[0]
        .par_iter()
        .map(|&(x0, w0)| -> Result<[f64; N]> {
            let mut acc = [0.0; N];
            let mut x = vec![0.0; rules.len()];
            x[0] = x0;
            for flat in 0..inner_count {
                let mut idx = flat;
                let mut w = w0;
                for (k, rule) in rules[1..].iter().enumerate().rev() {
                    let (xk, wk) = rule[idx % rule.len()];
                    x[k + 1] = xk;
                    w *= wk;
                    idx /= rule.len();
                }
                let vals = f(&x)?;
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += w * v;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = [0.0; N];
    for slab in slabs {
        let vals = slab?;
        for (a, v) in total.iter_mut().zip(vals) {
            *a += v;
        }
    }
    Ok(total)
}

/// Check that the per-axis subinterval counts match the domain dimension.
fn check_mesh(domain: &DomainRect, mg: &[usize]) -> Result<()> {
    if mg.len() != domain.dim() {
        return Err(CoreError::InvalidArgument(format!(
            "mesh has {} axis counts for a {}-dimensional domain",
            mg.len(),
            domain.dim()
        )));
    }
    Ok(())
}

/// Integrate several integrands at once over the domain interior.  `mg`
/// gives the number of Simpson subintervals per axis.
pub fn integrate_rect_many<const N: usize, F>(
    domain: &DomainRect,
    mg: &[usize],
    f: F,
) -> Result<[f64; N]>
where
    F: Fn(&[f64]) -> Result<[f64; N]> + Sync,
{
    check_mesh(domain, mg)?;
    let rules: Vec<_> = (0..domain.dim())
        .map(|k| domain.axis_rule(k, mg[k]))
        .collect();
    tensor_integrate(&rules, f)
}

/// Integrate a scalar integrand over the domain interior.
pub fn integrate_rect<F>(domain: &DomainRect, mg: &[usize], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    integrate_rect_many(domain, mg, |x| f(x).map(|v| [v])).map(|[v]| v)
}

/// Integrate several integrands at once over every boundary face.  The
/// integrand receives the face descriptor and the full ambient coordinates
/// of the quadrature node (with `x[face.axis] = face.value`).
pub fn integrate_faces_many<const N: usize, F>(
    domain: &DomainRect,
    mg: &[usize],
    f: F,
) -> Result<[f64; N]>
where
    F: Fn(&Face, &[f64]) -> Result<[f64; N]> + Sync,
{
    check_mesh(domain, mg)?;
    let d = domain.dim();
    let mut total = [0.0; N];
    for face in domain.faces() {
        let rules: Vec<_> = (0..d)
            .filter(|&k| k != face.axis)
            .map(|k| domain.axis_rule(k, mg[k]))
            .collect();
        let vals = tensor_integrate(&rules, |xr| {
            let mut x = Vec::with_capacity(d);
            x.extend_from_slice(&xr[..face.axis]);
            x.push(face.value);
            x.extend_from_slice(&xr[face.axis..]);
            f(&face, &x)
        })?;
        for (a, v) in total.iter_mut().zip(vals) {
            *a += v;
        }
    }
    Ok(total)
}

/// Integrate a scalar integrand over every boundary face.
pub fn integrate_faces<F>(domain: &DomainRect, mg: &[usize], f: F) -> Result<f64>
where
    F: Fn(&Face, &[f64]) -> Result<f64> + Sync,
{
    integrate_faces_many(domain, mg, |face, x| f(face, x).map(|v| [v])).map(|[v]| v)
}

/// Integrate several integrands at once over every codimension-two corner.
pub fn integrate_corners_many<const N: usize, F>(
    domain: &DomainRect,
    mg: &[usize],
    f: F,
) -> Result<[f64; N]>
where
    F: Fn(&Corner, &[f64]) -> Result<[f64; N]> + Sync,
{
    check_mesh(domain, mg)?;
    let d = domain.dim();
    let mut total = [0.0; N];
    for corner in domain.corners() {
        let (k1, k2) = corner.axes;
        let rules: Vec<_> = (0..d)
            .filter(|&k| k != k1 && k != k2)
            .map(|k| domain.axis_rule(k, mg[k]))
            .collect();
        let vals = tensor_integrate(&rules, |xr| {
            let mut x = Vec::with_capacity(d);
            let mut it = xr.iter();
            for k in 0..d {
                if k == k1 {
                    x.push(corner.values.0);
                } else if k == k2 {
                    x.push(corner.values.1);
                } else {
                    x.push(*it.next().expect("reduced coordinate"));
                }
            }
            f(&corner, &x)
        })?;
        for (a, v) in total.iter_mut().zip(vals) {
            *a += v;
        }
    }
    Ok(total)
}

/// Integrate a scalar integrand over every codimension-two corner.
pub fn integrate_corners<F>(domain: &DomainRect, mg: &[usize], f: F) -> Result<f64>
where
    F: Fn(&Corner, &[f64]) -> Result<f64> + Sync,
{
    integrate_corners_many(domain, mg, |corner, x| f(corner, x).map(|v| [v])).map(|[v]| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_for_cubics() {
        // Simpson's rule integrates cubics exactly.
        let rule = simpson_rule(0.0, 1.0, 2);
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(3))
            .sum();
        assert!((got - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn simpson_converges_on_sine() {
        let rule = simpson_rule(0.0, std::f64::consts::PI, 400);
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.sin())
            .sum();
        assert!((got - 2.0).abs() <= 1e-10, "got {got}");
    }

    #[test]
    fn interval_normalization() {
        assert_eq!(simpson_intervals(0), 2);
        assert_eq!(simpson_intervals(1), 2);
        assert_eq!(simpson_intervals(2), 2);
        assert_eq!(simpson_intervals(5), 6);
        assert_eq!(simpson_intervals(8), 8);
    }

    #[test]
    fn rect_integral_2d_polynomial() {
        // ∫_0^1 ∫_0^2 x y² dy dx = (1/2)(8/3) = 4/3, exact for Simpson.
        let dom = DomainRect::new(&[(0.0, 1.0), (0.0, 2.0)]).unwrap();
        let got = integrate_rect(&dom, &[4, 4], |x| Ok(x[0] * x[1] * x[1])).unwrap();
        assert!((got - 4.0 / 3.0).abs() <= 1e-14);
    }

    #[test]
    fn exclusion_splits_axis() {
        // ∫ x dx over [0,1] ∪ [2,3] = 1/2 + 5/2 = 3.
        let dom = DomainRect::new(&[(0.0, 3.0)])
            .unwrap()
            .with_exclusion(0, 1.0, 2.0)
            .unwrap();
        assert_eq!(dom.segments(0), &[(0.0, 1.0), (2.0, 3.0)]);
        let got = integrate_rect(&dom, &[8], |x| Ok(x[0])).unwrap();
        assert!((got - 3.0).abs() <= 1e-14);
    }

    #[test]
    fn exclusion_validation() {
        let dom = DomainRect::new(&[(0.0, 1.0)]).unwrap();
        assert!(dom.clone().with_exclusion(0, -0.1, 0.5).is_err());
        assert!(dom.clone().with_exclusion(0, 0.5, 0.4).is_err());
        let dom = dom.with_exclusion(0, 0.2, 0.4).unwrap();
        assert!(dom.with_exclusion(0, 0.3, 0.6).is_err()); // overlap
    }

    #[test]
    fn face_enumeration_counts_and_signs() {
        let dom = DomainRect::new(&[(0.0, 1.0), (0.0, 2.0)]).unwrap();
        let faces = dom.faces();
        assert_eq!(faces.len(), 4);
        assert!(faces.contains(&Face {
            axis: 0,
            value: 0.0,
            outward: -1.0
        }));
        assert!(faces.contains(&Face {
            axis: 1,
            value: 2.0,
            outward: 1.0
        }));

        // An exclusion adds a pair of internal faces with outward normals
        // pointing into the removed slab.
        let dom = dom.with_exclusion(0, 0.4, 0.6).unwrap();
        let faces = dom.faces();
        assert_eq!(faces.len(), 6);
        assert!(faces.contains(&Face {
            axis: 0,
            value: 0.4,
            outward: 1.0
        }));
        assert!(faces.contains(&Face {
            axis: 0,
            value: 0.6,
            outward: -1.0
        }));
        assert_eq!(dom.corners().len(), 8);
    }

    #[test]
    fn periodic_axis_drops_outer_faces() {
        let dom = DomainRect::new(&[(0.0, 1.0), (0.0, 2.0)])
            .unwrap()
            .with_periodic(1)
            .unwrap();
        let faces = dom.faces();
        assert_eq!(faces.len(), 2);
        assert!(faces.iter().all(|f| f.axis == 0));
        assert!(dom.corners().is_empty());

        // With an exclusion the periodic axis regains two internal faces.
        let dom = dom.with_exclusion(1, 0.5, 0.7).unwrap();
        assert_eq!(dom.faces().len(), 4);
        assert_eq!(dom.corners().len(), 4);
    }

    #[test]
    fn face_integral_measures_perimeter() {
        let dom = DomainRect::new(&[(0.0, 1.0), (0.0, 2.0)]).unwrap();
        let got = integrate_faces(&dom, &[6, 6], |_, _| Ok(1.0)).unwrap();
        assert!((got - 6.0).abs() <= 1e-14); // two faces of length 2, two of length 1
    }

    #[test]
    fn face_integral_in_one_dimension_is_endpoint_sum() {
        let dom = DomainRect::new(&[(1.0, 4.0)]).unwrap();
        let got = integrate_faces(&dom, &[4], |face, x| Ok(face.outward * x[0])).unwrap();
        assert!((got - (4.0 - 1.0)).abs() <= 1e-14);
    }

    #[test]
    fn corner_sum_2d() {
        let dom = DomainRect::new(&[(0.0, 1.0), (0.0, 2.0)]).unwrap();
        let got = integrate_corners(&dom, &[4, 4], |_, _| Ok(1.0)).unwrap();
        assert!((got - 4.0).abs() <= 1e-14);
        // Corner coordinates are the box vertices.
        let sum = integrate_corners(&dom, &[4, 4], |_, x| Ok(x[0] + x[1])).unwrap();
        assert!((sum - (0.0 + 2.0 + 1.0 + 3.0)).abs() <= 1e-14);
    }

    #[test]
    fn corner_integral_3d_runs_over_edges() {
        // In three dimensions corners are edges; integrating 1 gives the
        // total edge length: 12 edges of the unit cube.
        let dom = DomainRect::new(&[(0.0, 1.0); 3]).unwrap();
        let got = integrate_corners(&dom, &[4, 4, 4], |_, _| Ok(1.0)).unwrap();
        assert!((got - 12.0).abs() <= 1e-13);
    }

    #[test]
    fn euler_characteristic_products() {
        let square = DomainRect::new(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(square.euler_characteristic(), 1);
        let split = square.clone().with_exclusion(0, 0.4, 0.5).unwrap();
        assert_eq!(split.euler_characteristic(), 2);
        let cyl = square.clone().with_periodic(1).unwrap();
        assert_eq!(cyl.euler_characteristic(), 0);
        let arcs = cyl
            .with_exclusion(1, 0.2, 0.3)
            .unwrap()
            .with_exclusion(1, 0.6, 0.7)
            .unwrap();
        assert_eq!(arcs.euler_characteristic(), 2);
    }

    #[test]
    fn integrand_errors_propagate() {
        let dom = DomainRect::new(&[(0.0, 1.0)]).unwrap();
        let res = integrate_rect(&dom, &[4], |x| {
            if x[0] > 0.7 {
                Err(CoreError::InvalidArgument("bad node".into()))
            } else {
                Ok(1.0)
            }
        });
        assert!(res.is_err());
    }

    #[test]
    fn proportional_budget_split() {
        let dom = DomainRect::new(&[(0.0, 1.0)])
            .unwrap()
            .with_exclusion(0, 0.5, 0.6)
            .unwrap();
        // Segments of length 0.5 and 0.4 share a budget of 10 intervals:
        // 6 and 4 intervals → 7 + 5 nodes.
        let rule = dom.axis_rule(0, 10);
        assert_eq!(rule.len(), 12);
        let total_weight: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((total_weight - 0.9).abs() <= 1e-15);
    }

    #[test]
    fn multi_integrand_matches_separate_calls() {
        let dom = DomainRect::new(&[(0.0, 2.0), (0.0, 1.0)]).unwrap();
        let [a, b] = integrate_rect_many(&dom, &[8, 8], |x| Ok([x[0], x[0] * x[1]])).unwrap();
        let a1 = integrate_rect(&dom, &[8, 8], |x| Ok(x[0])).unwrap();
        let b1 = integrate_rect(&dom, &[8, 8], |x| Ok(x[0] * x[1])).unwrap();
        assert_eq!(a, a1);
        assert_eq!(b, b1);
        assert!((a - 2.0).abs() <= 1e-14);
        assert!((b - 1.0).abs() <= 1e-14);
    }
}
