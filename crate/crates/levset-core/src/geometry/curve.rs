//! Sampled curves in the plane and the oracles defined directly on them.

use alloc::vec::Vec;

use super::{point_segment, GeometryError, Point2, Rect};
use crate::num;

/// An ordered polyline in the plane, open or closed. The discrete stand-in
/// for an embedded 1-dimensional submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    points: Vec<Point2>,
    closed: bool,
}

/// Discrete reach surrogate: a curvature bound and a global separation
/// bound, combined conservatively.
#[derive(Debug, Clone, Copy)]
pub struct ReachEstimate {
    /// 1 / (maximum discrete curvature).
    pub local: f64,
    /// Half the minimum distance between samples at least 3 indices apart.
    pub global: f64,
    /// `min(local, global)`.
    pub reach: f64,
    /// `1 / reach`.
    pub kappa_hat: f64,
}

impl SampledCurve {
    /// Builds a curve, checking point counts and consecutive-point
    /// separation (`> 1e-12 x diameter`). Self-intersection is checked
    /// separately by [`SampledCurve::assert_embedded`] since it is
    /// quadratic in the number of segments.
    pub fn new(points: Vec<Point2>, closed: bool) -> Result<Self, GeometryError> {
        let need = if closed { 3 } else { 2 };
        if points.len() < need {
            return Err(GeometryError::TooFewPoints { got: points.len(), need });
        }
        let curve = SampledCurve { points, closed };
        let min_sep = 1e-12 * curve.diameter_bound();
        let n = curve.points.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            let a = curve.points[i];
            let b = curve.points[(i + 1) % n];
            if a.dist(b) <= min_sep {
                return Err(GeometryError::DegenerateSegment { index: i });
            }
        }
        Ok(curve)
    }

    /// Regular polygon inscribed in a circle; handy in tests and as the
    /// discrete form of analytic circles.
    pub fn circle(center: Point2, radius: f64, n: usize) -> Result<Self, GeometryError> {
        if radius <= 0.0 {
            return Err(GeometryError::BadParameter("radius must be positive"));
        }
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            pts.push(Point2::new(
                center.x + radius * num::cos(t),
                center.y + radius * num::sin(t),
            ));
        }
        SampledCurve::new(pts, true)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Number of segments (including the closing one).
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub fn segment(&self, i: usize) -> (Point2, Point2) {
        let n = self.points.len();
        (self.points[i], self.points[(i + 1) % n])
    }

    pub fn bounding_box(&self) -> Rect {
        let mut min = self.points[0];
        let mut max = self.points[0];
        for p in &self.points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Rect::new(min, max)
    }

    /// Upper bound on the diameter (bounding-box diagonal).
    pub fn diameter_bound(&self) -> f64 {
        let b = self.bounding_box();
        num::hypot(b.max.x - b.min.x, b.max.y - b.min.y)
    }

    /// Uniformly scales the curve about the origin.
    pub fn scaled(&self, s: f64) -> Result<SampledCurve, GeometryError> {
        if s <= 0.0 {
            return Err(GeometryError::BadParameter("scale must be positive"));
        }
        let pts = self.points.iter().map(|p| Point2::new(p.x * s, p.y * s)).collect();
        SampledCurve::new(pts, self.closed)
    }

    /// Total segment length. This is the H^1 ground truth used by the
    /// acceptance comparisons.
    pub fn polyline_length(&self) -> f64 {
        let mut acc = num::CompensatedSum::new();
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            acc.add(a.dist(b));
        }
        acc.value()
    }

    /// Exact minimum distance from `p` over all segments, with the foot
    /// point and the index of the segment realizing it. Ties go to the
    /// lowest segment index.
    pub fn distance_and_foot(&self, p: Point2) -> (f64, Point2, usize) {
        let mut best = f64::INFINITY;
        let mut foot = self.points[0];
        let mut seg = 0usize;
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            let (d, t) = point_segment(p, a, b);
            if d < best {
                best = d;
                foot = Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                seg = i;
            }
        }
        (best, foot, seg)
    }

    /// Checks pairwise non-adjacent segments for intersection; required
    /// before treating the curve as an embedded submanifold.
    pub fn assert_embedded(&self) -> Result<(), GeometryError> {
        let m = self.segment_count();
        let n = self.points.len();
        for i in 0..m {
            for j in (i + 2)..m {
                // skip the wrap-around adjacency of closed curves
                if self.closed && i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = self.segment(i);
                let (c, d) = self.segment(j);
                if segments_intersect(a, b, c, d) {
                    return Err(GeometryError::SelfIntersection { seg_a: i, seg_b: j });
                }
            }
        }
        Ok(())
    }

    /// Discrete reach estimate: `min(1/max curvature, half min separation)`.
    ///
    /// Curvature at a vertex is `2 sin(theta/2) / l` with `theta` the
    /// turning angle and `l` the mean adjacent segment length; the global
    /// part is half the minimum distance between samples at least 3
    /// indices apart (cyclically).
    pub fn reach_estimate(&self) -> Result<ReachEstimate, GeometryError> {
        if !self.closed {
            return Err(GeometryError::NotClosed);
        }
        if self.points.len() < 8 {
            return Err(GeometryError::TooFewPoints { got: self.points.len(), need: 8 });
        }
        self.assert_embedded()?;
        let n = self.points.len();
        let mut max_kappa: f64 = 0.0;
        for i in 0..n {
            let prev = self.points[(i + n - 1) % n];
            let here = self.points[i];
            let next = self.points[(i + 1) % n];
            let l1 = prev.dist(here);
            let l2 = here.dist(next);
            let (ux, uy) = ((here.x - prev.x) / l1, (here.y - prev.y) / l1);
            let (vx, vy) = ((next.x - here.x) / l2, (next.y - here.y) / l2);
            let cross = ux * vy - uy * vx;
            let dot = ux * vx + uy * vy;
            let theta = num::abs(num::atan2(cross, dot));
            let kappa = 2.0 * num::sin(theta / 2.0) / (0.5 * (l1 + l2));
            max_kappa = max_kappa.max(kappa);
        }
        let local = if max_kappa > 0.0 { 1.0 / max_kappa } else { f64::INFINITY };
        let mut min_sep = f64::INFINITY;
        for i in 0..n {
            for j in (i + 3)..n {
                // indices must also be >= 3 apart cyclically
                if n - (j - i) < 3 {
                    continue;
                }
                min_sep = min_sep.min(self.points[i].dist(self.points[j]));
            }
        }
        let global = min_sep / 2.0;
        let reach = local.min(global);
        Ok(ReachEstimate { local, global, reach, kappa_hat: 1.0 / reach })
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2| -> bool {
        orient(p, q, r) == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn unit_square() -> SampledCurve {
        SampledCurve::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn circle_polygon_length_close_to_circumference() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 1.0, 4096).unwrap();
        let len = c.polyline_length();
        // inscribed polygon: 2n sin(pi/n)
        let exact = 2.0 * 4096.0 * num::sin(PI / 4096.0);
        assert!((len - exact).abs() < 1e-10);
        assert!((len - 2.0 * PI).abs() / (2.0 * PI) < 1e-5);
    }

    #[test]
    fn square_length_exact() {
        assert_eq!(unit_square().polyline_length(), 4.0);
    }

    #[test]
    fn open_two_point_curve() {
        let c = SampledCurve::new(
            vec![Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)],
            false,
        )
        .unwrap();
        assert_eq!(c.polyline_length(), 5.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        let err = SampledCurve::new(vec![Point2::new(0.0, 0.0)], false).unwrap_err();
        assert!(matches!(err, GeometryError::TooFewPoints { .. }));
        let err = SampledCurve::new(
            vec![Point2::new(0.0, 0.0), Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            true,
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateSegment { index: 0 }));
    }

    #[test]
    fn distance_to_circle_polygon() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 1.0, 4096).unwrap();
        let (d, foot, _) = c.distance_and_foot(Point2::new(2.0, 0.0));
        assert!((d - 1.0).abs() < 1e-5);
        assert!((foot.x - 1.0).abs() < 1e-5 && foot.y.abs() < 1e-3);
        // center of the circle
        let (d, _, _) = c.distance_and_foot(Point2::new(0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-5);
    }

    #[test]
    fn distance_at_vertex_is_zero() {
        let c = unit_square();
        let (d, foot, _) = c.distance_and_foot(Point2::new(1.0, 1.0));
        assert_eq!(d, 0.0);
        assert_eq!(foot, Point2::new(1.0, 1.0));
    }

    #[test]
    fn distance_tie_breaks_to_lowest_segment() {
        let c = unit_square();
        let (d, _, seg) = c.distance_and_foot(Point2::new(0.5, 0.5));
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(seg, 0);
    }

    #[test]
    fn reach_of_circle_is_radius() {
        for r in [1.0, 2.5] {
            let c = SampledCurve::circle(Point2::new(0.0, 0.0), r, 512).unwrap();
            let est = c.reach_estimate().unwrap();
            assert!(
                est.reach >= 0.95 * r && est.reach <= 1.01 * r,
                "reach {} for radius {}",
                est.reach,
                r
            );
            assert!((est.kappa_hat * est.reach - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reach_of_stadium_is_cap_radius() {
        // two r-semicircles joined by straight segments of length 4
        let r = 0.5;
        let mut pts = Vec::new();
        let m = 64;
        for i in 0..=m {
            let t = -PI / 2.0 + PI * i as f64 / m as f64;
            pts.push(Point2::new(2.0 + r * num::cos(t), r * num::sin(t)));
        }
        for i in 0..=m {
            let t = PI / 2.0 + PI * i as f64 / m as f64;
            pts.push(Point2::new(-2.0 + r * num::cos(t), r * num::sin(t)));
        }
        // remove duplicated joins
        pts.dedup_by(|a, b| a.dist(*b) < 1e-9);
        let c = SampledCurve::new(pts, true).unwrap();
        let est = c.reach_estimate().unwrap();
        assert!((est.reach - r).abs() / r < 0.05, "reach {}", est.reach);
    }

    #[test]
    fn reach_requires_closed_curve() {
        let c = SampledCurve::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            false,
        )
        .unwrap();
        assert!(matches!(c.reach_estimate(), Err(GeometryError::NotClosed)));
    }

    #[test]
    fn self_intersection_detected() {
        let bow = SampledCurve::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            true,
        )
        .unwrap();
        assert!(matches!(
            bow.assert_embedded(),
            Err(GeometryError::SelfIntersection { .. })
        ));
        assert!(unit_square().assert_embedded().is_ok());
    }

    #[test]
    fn distance_is_one_lipschitz() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 1.0, 64).unwrap();
        let mut state = 7u64;
        for _ in 0..200 {
            state = num::splitmix64(state);
            let px = num::unit_f64(state) * 4.0 - 2.0;
            state = num::splitmix64(state);
            let py = num::unit_f64(state) * 4.0 - 2.0;
            state = num::splitmix64(state);
            let qx = num::unit_f64(state) * 4.0 - 2.0;
            state = num::splitmix64(state);
            let qy = num::unit_f64(state) * 4.0 - 2.0;
            let p = Point2::new(px, py);
            let q = Point2::new(qx, qy);
            let (dp, _, _) = c.distance_and_foot(p);
            let (dq, _, _) = c.distance_and_foot(q);
            assert!((dp - dq).abs() <= p.dist(q) + 1e-12);
        }
    }
}
