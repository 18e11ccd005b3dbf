//! Uniform scalar-field abstraction over analytic expressions, distance
//! fields to sampled curves, and level-shifted fields.
//!
//! The estimator only ever sees `|f|`, the gradient norm, and (near the
//! zero set) the gradient direction, so all three backends expose exactly
//! those.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{EvalError, Expression};
use crate::geometry::{GeometryError, Point2, SampledCurve, SegmentIndex};
use crate::num;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    Eval(EvalError),
    Geometry(GeometryError),
    DimensionMismatch { expected: usize, got: usize },
    EmptySampleList,
    BadParameter(&'static str),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::Eval(e) => write!(f, "{}", e),
            FieldError::Geometry(e) => write!(f, "{}", e),
            FieldError::DimensionMismatch { expected, got } => {
                write!(f, "point has dimension {}, expected {}", got, expected)
            }
            FieldError::EmptySampleList => write!(f, "sample list is empty"),
            FieldError::BadParameter(what) => write!(f, "invalid parameter: {}", what),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}

impl From<EvalError> for FieldError {
    fn from(e: EvalError) -> Self {
        FieldError::Eval(e)
    }
}

impl From<GeometryError> for FieldError {
    fn from(e: GeometryError) -> Self {
        FieldError::Geometry(e)
    }
}

/// Unsigned distance field to one or more sampled curves in the plane,
/// with a static segment index built at construction.
#[derive(Debug, Clone)]
pub struct DistanceField {
    curves: Vec<SampledCurve>,
    index: SegmentIndex,
    /// points closer to the curve than this count as lying on it
    zero_tol: f64,
}

impl DistanceField {
    fn new(curves: Vec<SampledCurve>) -> Result<Self, FieldError> {
        if curves.is_empty() {
            return Err(FieldError::BadParameter("distance field needs at least one curve"));
        }
        let mut diameter: f64 = 0.0;
        for c in &curves {
            diameter = diameter.max(c.diameter_bound());
        }
        let index = SegmentIndex::build(&curves);
        Ok(DistanceField { curves, index, zero_tol: 1e-12 * diameter })
    }

    pub fn curves(&self) -> &[SampledCurve] {
        &self.curves
    }

    pub fn nearest(&self, p: Point2) -> (f64, Point2, usize, usize) {
        self.index.nearest(p)
    }

    /// Unit gradient direction of the distance field. Away from the curve
    /// this is `(p - foot)/|p - foot|`; within the on-curve tolerance the
    /// foot segment's normal is used instead.
    fn gradient_dir(&self, p: Point2) -> [f64; 2] {
        let (d, foot, curve, seg) = self.index.nearest(p);
        if d > self.zero_tol {
            [(p.x - foot.x) / d, (p.y - foot.y) / d]
        } else {
            let (a, b) = self.curves[curve].segment(seg);
            let len = a.dist(b);
            [-(b.y - a.y) / len, (b.x - a.x) / len]
        }
    }
}

/// A scalar field `f: R^n -> R` with gradient access.
#[derive(Debug, Clone)]
pub enum ScalarFieldHandle {
    Analytic(Expression),
    Distance(DistanceField),
    Shifted(Box<ScalarFieldHandle>, f64),
}

/// Value and gradient norm at a point, the two quantities the singular
/// integrand consumes.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub value: f64,
    pub grad_norm: f64,
}

/// Gradient-regularity report near the zero set.
#[derive(Debug, Clone, Copy)]
pub struct RegularityReport {
    pub min_grad: f64,
    pub max_grad: f64,
    pub ok: bool,
}

impl ScalarFieldHandle {
    pub fn analytic(e: Expression) -> Self {
        ScalarFieldHandle::Analytic(e)
    }

    pub fn distance(curve: SampledCurve) -> Result<Self, FieldError> {
        Ok(ScalarFieldHandle::Distance(DistanceField::new(alloc::vec![curve])?))
    }

    /// Distance field to a disjoint union of curves.
    pub fn distance_union(curves: Vec<SampledCurve>) -> Result<Self, FieldError> {
        Ok(ScalarFieldHandle::Distance(DistanceField::new(curves)?))
    }

    /// The level-shifted field `g = f - c`, whose zero set is the
    /// `c`-level set of `f`.
    pub fn shifted(inner: ScalarFieldHandle, c: f64) -> Self {
        ScalarFieldHandle::Shifted(Box::new(inner), c)
    }

    pub fn dim(&self) -> usize {
        match self {
            ScalarFieldHandle::Analytic(e) => e.dim(),
            ScalarFieldHandle::Distance(_) => 2,
            ScalarFieldHandle::Shifted(inner, _) => inner.dim(),
        }
    }

    /// True when the field bottoms out in a distance field, whose gradient
    /// norm is identically 1 almost everywhere.
    pub fn is_distance_backed(&self) -> bool {
        match self {
            ScalarFieldHandle::Analytic(_) => false,
            ScalarFieldHandle::Distance(_) => true,
            ScalarFieldHandle::Shifted(inner, _) => inner.is_distance_backed(),
        }
    }

    /// True when the field value is nonnegative by construction, so band
    /// detection cannot rely on sign changes.
    pub fn is_unsigned(&self) -> bool {
        match self {
            ScalarFieldHandle::Analytic(_) => false,
            ScalarFieldHandle::Distance(_) => true,
            // a shift reintroduces signs
            ScalarFieldHandle::Shifted(_, c) => *c == 0.0 && self.is_distance_backed(),
        }
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<f64, FieldError> {
        self.check_dim(p)?;
        match self {
            ScalarFieldHandle::Analytic(e) => Ok(e.eval(p)?),
            ScalarFieldHandle::Distance(d) => {
                let (dist, _, _, _) = d.index.nearest(Point2::new(p[0], p[1]));
                Ok(dist)
            }
            ScalarFieldHandle::Shifted(inner, c) => Ok(inner.evaluate(p)? - c),
        }
    }

    /// Gradient norm: `|grad f|` for analytic fields, the a.e. value 1 for
    /// distance fields (returned even on the medial axis), unchanged by
    /// shifts.
    pub fn gradient_norm(&self, p: &[f64]) -> Result<f64, FieldError> {
        self.check_dim(p)?;
        match self {
            ScalarFieldHandle::Analytic(e) => Ok(e.eval_with_gradient(p)?.gradient_norm()),
            ScalarFieldHandle::Distance(_) => Ok(1.0),
            ScalarFieldHandle::Shifted(inner, _) => inner.gradient_norm(p),
        }
    }

    /// Value and gradient norm in one pass.
    pub fn probe(&self, p: &[f64]) -> Result<Probe, FieldError> {
        self.check_dim(p)?;
        match self {
            ScalarFieldHandle::Analytic(e) => {
                let g = e.eval_with_gradient(p)?;
                Ok(Probe { value: g.value, grad_norm: g.gradient_norm() })
            }
            ScalarFieldHandle::Distance(d) => {
                let (dist, _, _, _) = d.index.nearest(Point2::new(p[0], p[1]));
                Ok(Probe { value: dist, grad_norm: 1.0 })
            }
            ScalarFieldHandle::Shifted(inner, c) => {
                let mut pr = inner.probe(p)?;
                pr.value -= c;
                Ok(pr)
            }
        }
    }

    /// Writes the gradient into `out` (length = dim). For distance fields
    /// this is the a.e. unit direction away from the nearest foot point.
    pub fn gradient(&self, p: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
        self.check_dim(p)?;
        debug_assert_eq!(out.len(), self.dim());
        match self {
            ScalarFieldHandle::Analytic(e) => {
                let g = e.eval_with_gradient(p)?;
                out.copy_from_slice(g.gradient());
                Ok(())
            }
            ScalarFieldHandle::Distance(d) => {
                let dir = d.gradient_dir(Point2::new(p[0], p[1]));
                out.copy_from_slice(&dir);
                Ok(())
            }
            ScalarFieldHandle::Shifted(inner, _) => inner.gradient(p, out),
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<(), FieldError> {
        if p.len() != self.dim() {
            return Err(FieldError::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }
}

/// Checks that the gradient norm stays bounded away from zero near the
/// zero set: min/max of `|grad f|` over the given samples and over random
/// probes within `probe_radius` of each.
///
/// Distance fields pass unconditionally with `min = max = 1`.
pub fn regularity_check(
    f: &ScalarFieldHandle,
    zero_samples: &[Vec<f64>],
    probe_radius: f64,
) -> Result<RegularityReport, FieldError> {
    const PROBES_PER_SAMPLE: usize = 16;
    const MARGIN: f64 = 1e-6;
    if zero_samples.is_empty() {
        return Err(FieldError::EmptySampleList);
    }
    if f.is_distance_backed() {
        return Ok(RegularityReport { min_grad: 1.0, max_grad: 1.0, ok: true });
    }
    let dim = f.dim();
    let mut min_grad = f64::INFINITY;
    let mut max_grad = f64::NEG_INFINITY;
    let mut state = 0x5eed_cafe_u64;
    let record = |g: f64, min_grad: &mut f64, max_grad: &mut f64| {
        *min_grad = min_grad.min(g);
        *max_grad = max_grad.max(g);
    };
    let mut probe_point = alloc::vec![0.0; dim];
    for sample in zero_samples {
        record(f.gradient_norm(sample)?, &mut min_grad, &mut max_grad);
        for _ in 0..PROBES_PER_SAMPLE {
            for (i, x) in probe_point.iter_mut().enumerate() {
                state = num::splitmix64(state);
                *x = sample[i] + (2.0 * num::unit_f64(state) - 1.0) * probe_radius;
            }
            record(f.gradient_norm(&probe_point)?, &mut min_grad, &mut max_grad);
        }
    }
    Ok(RegularityReport { min_grad, max_grad, ok: min_grad > MARGIN })
}
