//! Curve containers and independent geometric oracles.
//!
//! Everything in this module is deliberately independent of the adaptive
//! quadrature in [`crate::estimator`]: lengths come from polyline sums,
//! tube volumes from grid counting, arc lengths from fixed-order Simpson.
//! These are the ground truths the estimator is compared against.

mod curve;
mod index;
mod marching;

pub use curve::{ReachEstimate, SampledCurve};
pub use index::SegmentIndex;
pub use marching::zero_set_trace;

use core::fmt;

use crate::expr::{EvalError, Expression};
use crate::num;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        num::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Rect { min, max }
    }

    pub fn inflate(self, r: f64) -> Rect {
        Rect {
            min: Point2::new(self.min.x - r, self.min.y - r),
            max: Point2::new(self.max.x + r, self.max.y + r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    TooFewPoints { got: usize, need: usize },
    DegenerateSegment { index: usize },
    SelfIntersection { seg_a: usize, seg_b: usize },
    BadParameter(&'static str),
    NotClosed,
    Eval(EvalError),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::TooFewPoints { got, need } => {
                write!(f, "curve has {} points, needs at least {}", got, need)
            }
            GeometryError::DegenerateSegment { index } => {
                write!(f, "consecutive points at index {} coincide", index)
            }
            GeometryError::SelfIntersection { seg_a, seg_b } => {
                write!(f, "segments {} and {} intersect", seg_a, seg_b)
            }
            GeometryError::BadParameter(what) => write!(f, "invalid parameter: {}", what),
            GeometryError::NotClosed => write!(f, "operation requires a closed curve"),
            GeometryError::Eval(e) => write!(f, "{}", e),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeometryError {}

impl From<EvalError> for GeometryError {
    fn from(e: EvalError) -> Self {
        GeometryError::Eval(e)
    }
}

/// Distance from `p` to the segment `ab`, with the parameter of the closest
/// point (clamped to `[0,1]`).
pub(crate) fn point_segment(p: Point2, a: Point2, b: Point2) -> (f64, f64) {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let fx = a.x + t * dx;
    let fy = a.y + t * dy;
    (num::hypot(p.x - fx, p.y - fy), t)
}

/// Area of the `epsilon`-tube around `c` by midpoint counting on an
/// `h`-pitched grid over the inflated bounding box.
///
/// The counting loop runs row by row in a fixed order; the result is a
/// plain cell count times `h^2`, so partitioning cannot change it.
pub fn tube_volume(c: &SampledCurve, epsilon: f64, h: f64) -> Result<f64, GeometryError> {
    if epsilon <= 0.0 {
        return Err(GeometryError::BadParameter("epsilon must be positive"));
    }
    if h <= 0.0 {
        return Err(GeometryError::BadParameter("h must be positive"));
    }
    let index = SegmentIndex::build(core::slice::from_ref(c));
    let bbox = c.bounding_box().inflate(epsilon + h);
    let nx = num::ceil((bbox.max.x - bbox.min.x) / h) as usize;
    let ny = num::ceil((bbox.max.y - bbox.min.y) / h) as usize;
    let mut inside: u64 = 0;
    for j in 0..ny {
        let y = bbox.min.y + (j as f64 + 0.5) * h;
        for i in 0..nx {
            let x = bbox.min.x + (i as f64 + 0.5) * h;
            let (d, _, _, _) = index.nearest(Point2::new(x, y));
            if d <= epsilon {
                inside += 1;
            }
        }
    }
    Ok(inside as f64 * h * h)
}

/// Arc length of the graph of a one-variable expression on `[a,b]` by
/// composite Simpson over `n` subintervals (rounded up to even), with the
/// derivative supplied by dual numbers.
pub fn arc_length_graph(
    e: &Expression,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64, GeometryError> {
    if e.dim() != 1 {
        return Err(GeometryError::BadParameter("expression must have one variable"));
    }
    if !(a < b) {
        return Err(GeometryError::BadParameter("interval must satisfy a < b"));
    }
    if n < 2 {
        return Err(GeometryError::BadParameter("n must be at least 2"));
    }
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let integrand = |x: f64| -> Result<f64, GeometryError> {
        let g = e.eval_with_gradient(&[x])?;
        let df = g.gradient()[0];
        Ok(num::sqrt(1.0 + df * df))
    };
    let mut acc = num::CompensatedSum::new();
    acc.add(integrand(a)?);
    acc.add(integrand(b)?);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * integrand(a + i as f64 * h)?);
    }
    Ok(acc.value() * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;

    #[test]
    fn arc_length_of_sine() {
        let e = Expression::parse("sin(x)", 1).unwrap();
        let len = arc_length_graph(&e, 0.0, 2.0 * core::f64::consts::PI, 1024).unwrap();
        assert!((len - 7.6404).abs() < 1e-3, "got {}", len);
    }

    #[test]
    fn arc_length_of_constant_and_line() {
        let e = Expression::parse("x*0+2", 1).unwrap();
        let len = arc_length_graph(&e, 0.0, 1.0, 16).unwrap();
        assert!((len - 1.0).abs() < 1e-12);
        let e = Expression::parse("x", 1).unwrap();
        let len = arc_length_graph(&e, 0.0, 1.0, 16).unwrap();
        assert!((len - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn tube_volume_of_circle_matches_annulus() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 1.0, 2048).unwrap();
        let eps = 0.01;
        let v = tube_volume(&c, eps, 1e-3).unwrap();
        let exact = core::f64::consts::PI * ((1.0 + eps).powi(2) - (1.0 - eps).powi(2));
        assert!((v - exact).abs() / exact < 0.02, "v={} exact={}", v, exact);
    }

    #[test]
    fn tube_volume_monotone_in_epsilon() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 0.5, 128).unwrap();
        let v1 = tube_volume(&c, 0.02, 2e-3).unwrap();
        let v2 = tube_volume(&c, 0.04, 2e-3).unwrap();
        assert!(v2 >= v1);
    }

    #[test]
    fn tube_volume_of_square_has_corner_caps() {
        let c = SampledCurve::new(
            alloc::vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            true,
        )
        .unwrap();
        let eps = 0.01;
        let v = tube_volume(&c, eps, 5e-4).unwrap();
        // offset polygon: perimeter band plus convex caps minus inner corner deficit
        let exact = 2.0 * eps * 4.0 + core::f64::consts::PI * eps * eps - 4.0 * eps * eps;
        assert!((v - exact).abs() < 5e-4, "v={} exact={}", v, exact);
    }

    #[test]
    fn tube_rejects_bad_parameters() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 1.0, 16).unwrap();
        assert!(tube_volume(&c, 0.0, 0.1).is_err());
        assert!(tube_volume(&c, 0.1, -1.0).is_err());
    }
}
