//! A packing of disjoint circles at rational centers of the unit square
//! whose radii collapse so fast that the union of boundaries has finite
//! total length while its closure becomes space-filling. Finite
//! truncations are honest disjoint unions of circles and feed directly
//! into the measure estimator; the full limit set is the counterexample
//! the truncations witness.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{Point2, SampledCurve};
use crate::num;

/// Largest binary exponent representable as a (subnormal) f64.
const MAX_EXPONENT: i64 = 1074;

#[derive(Debug, Clone, PartialEq)]
pub enum PathologyError {
    /// `2^(-(m^2+m)/2)` underflows f64 for this `m`; carries the largest
    /// usable `m`.
    ScheduleUnderflow { m: u32, m_max: u32 },
    BadParameter(&'static str),
}

impl fmt::Display for PathologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathologyError::ScheduleUnderflow { m, m_max } => {
                write!(f, "radius index {} underflows f64; largest usable index is {}", m, m_max)
            }
            PathologyError::BadParameter(what) => write!(f, "invalid parameter: {}", what),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PathologyError {}

fn schedule_exponent(m: u32) -> i64 {
    let m = m as i64;
    (m * m + m) / 2
}

/// Largest `m` whose radius is still a representable positive double.
pub fn max_schedule_index() -> u32 {
    let mut m = 1;
    while schedule_exponent(m + 1) <= MAX_EXPONENT {
        m += 1;
    }
    m
}

/// The radius `r_m = 2^(-(m^2+m)/2)`, exact in binary arithmetic.
pub fn radius(m: u32) -> Result<f64, PathologyError> {
    if m < 1 {
        return Err(PathologyError::BadParameter("m must be at least 1"));
    }
    let e = schedule_exponent(m);
    if e > MAX_EXPONENT {
        return Err(PathologyError::ScheduleUnderflow { m, m_max: max_schedule_index() });
    }
    Ok(num::exp2i(-(e as i32)))
}

/// The radius schedule up to `m_max`, with the per-index tail budgets
/// `eps_m = 2^(-m)`.
#[derive(Debug, Clone)]
pub struct RadiusSchedule {
    pub m_max: u32,
    pub radii: Vec<f64>,
    pub eps: Vec<f64>,
}

impl RadiusSchedule {
    pub fn new(m_max: u32) -> Result<RadiusSchedule, PathologyError> {
        if m_max < 1 {
            return Err(PathologyError::BadParameter("m_max must be at least 1"));
        }
        let mut radii = Vec::with_capacity(m_max as usize);
        let mut eps = Vec::with_capacity(m_max as usize);
        for m in 1..=m_max {
            radii.push(radius(m)?);
            eps.push(num::exp2i(-(m as i32)));
        }
        Ok(RadiusSchedule { m_max, radii, eps })
    }
}

/// The area tail ratio `sum_{i=m+1..m_max} r_i^2 / r_m^2` (pi cancels).
///
/// Each term is an exact power of two, `2^(m^2+m-i^2-i)`, so the sum is
/// exact until terms leave the double range, where they are already far
/// below any tolerance of interest.
pub fn tail_ratio(m: u32, m_max: u32) -> Result<f64, PathologyError> {
    if m < 1 || m >= m_max {
        return Err(PathologyError::BadParameter("need 1 <= m < m_max"));
    }
    let base = schedule_exponent(m);
    let mut sum = 0.0;
    for i in (m + 1)..=m_max {
        let e = 2 * (base - schedule_exponent(i));
        if e < -MAX_EXPONENT {
            break;
        }
        sum += num::exp2i(e as i32);
    }
    Ok(sum)
}

/// One circle of the packing. `inside_parent` records whether its disc
/// lies inside an earlier disc (the construction alternates between
/// carving holes and adding islands; the measured set is always the
/// union of the circle curves themselves).
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
    pub schedule_index: u32,
    pub inside_parent: bool,
}

/// A greedily built set of disjoint circles in the open unit square.
#[derive(Debug, Clone)]
pub struct CircleSet {
    pub circles: Vec<Circle>,
    /// true when the radius schedule ran out of representable entries
    /// before `N` circles were accepted
    pub schedule_exhausted: bool,
}

impl CircleSet {
    pub fn total_length(&self) -> f64 {
        let mut acc = num::CompensatedSum::new();
        for c in &self.circles {
            acc.add(2.0 * core::f64::consts::PI * c.radius);
        }
        acc.value()
    }

    /// Distance from `p` to the union of circle curves.
    pub fn distance(&self, p: Point2) -> f64 {
        let mut best = f64::INFINITY;
        for c in &self.circles {
            best = best.min(num::abs(p.dist(c.center) - c.radius));
        }
        best
    }

    /// Checks every construction invariant: centers strictly inside the
    /// square, radii a strictly decreasing schedule subsequence, and the
    /// 3r clearance of each center from all earlier circles and the
    /// square boundary.
    pub fn validate(&self) -> Result<(), PathologyError> {
        let mut prev_index = 0u32;
        for (j, c) in self.circles.iter().enumerate() {
            if !(c.center.x > 0.0 && c.center.x < 1.0 && c.center.y > 0.0 && c.center.y < 1.0) {
                return Err(PathologyError::BadParameter("center outside the open unit square"));
            }
            if c.schedule_index <= prev_index {
                return Err(PathologyError::BadParameter(
                    "radii are not a strictly decreasing schedule subsequence",
                ));
            }
            if radius(c.schedule_index)? != c.radius {
                return Err(PathologyError::BadParameter("radius disagrees with its index"));
            }
            prev_index = c.schedule_index;
            let d = clearance(c.center, &self.circles[..j]);
            if !(3.0 * c.radius < d) {
                return Err(PathologyError::BadParameter("3r clearance violated"));
            }
        }
        Ok(())
    }
}

/// Distance from `q` to the union of earlier circle curves and the
/// square boundary.
fn clearance(q: Point2, earlier: &[Circle]) -> f64 {
    let mut d = q.x.min(q.y).min(1.0 - q.x).min(1.0 - q.y);
    for c in earlier {
        d = d.min(num::abs(q.dist(c.center) - c.radius));
    }
    d
}

/// Fractions in `(0,1)` in increasing-denominator order, reduced terms
/// only: 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...
fn rational(index: usize) -> f64 {
    let mut seen = 0usize;
    let mut q = 2u64;
    loop {
        for p in 1..q {
            if gcd(p, q) == 1 {
                if seen == index {
                    return p as f64 / q as f64;
                }
                seen += 1;
            }
        }
        q += 1;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Pair index `t` -> (i, j) by Cantor diagonals: (0,0), (0,1), (1,0),
/// (0,2), (1,1), (2,0), ...
fn diagonal_pair(t: usize) -> (usize, usize) {
    let mut s = 0usize;
    let mut base = 0usize;
    while base + s + 1 <= t {
        base += s + 1;
        s += 1;
    }
    let i = t - base;
    (i, s - i)
}

/// Builds the first `N` circles of the packing.
///
/// Rational candidate centers are visited in a fixed deterministic
/// order. A candidate landing exactly on an existing circle is nudged
/// off by a tiny power-of-two shift whose direction comes from the
/// seed. Each accepted circle takes the largest still-unused schedule
/// radius that keeps 3r clearance from everything placed so far.
pub fn build_circle_set(n: usize, enumeration_seed: u64) -> Result<CircleSet, PathologyError> {
    const ON_CIRCLE_TOL: f64 = 1e-12;
    // smallest power of two >= 4 * ON_CIRCLE_TOL
    let nudge = num::exp2i(-37);
    if n < 1 {
        return Err(PathologyError::BadParameter("n must be at least 1"));
    }
    let m_max = max_schedule_index();
    let mut circles: Vec<Circle> = Vec::with_capacity(n);
    let mut next_m = 1u32;
    let mut state = enumeration_seed;
    let mut exhausted = false;
    let mut t = 0usize;
    while circles.len() < n && !exhausted {
        let (i, j) = diagonal_pair(t);
        t += 1;
        let mut q = Point2::new(rational(i), rational(j));
        // perturb off any circle the candidate lies on
        let mut guard = 0;
        while clearance(q, &circles) <= ON_CIRCLE_TOL && guard < 64 {
            state = num::splitmix64(state);
            let (dx, dy) = match state & 3 {
                0 => (nudge, 0.0),
                1 => (-nudge, 0.0),
                2 => (0.0, nudge),
                _ => (0.0, -nudge),
            };
            let moved = Point2::new(q.x + dx, q.y + dy);
            if moved.x > 0.0 && moved.x < 1.0 && moved.y > 0.0 && moved.y < 1.0 {
                q = moved;
            }
            guard += 1;
        }
        let d = clearance(q, &circles);
        if d <= ON_CIRCLE_TOL {
            continue;
        }
        // largest unused radius passing the clearance test
        let mut m = next_m;
        let accepted = loop {
            if m > m_max {
                exhausted = true;
                break None;
            }
            let r = radius(m)?;
            if 3.0 * r < d {
                break Some((m, r));
            }
            m += 1;
        };
        if let Some((m, r)) = accepted {
            let inside_parent = circles.iter().any(|c| q.dist(c.center) < c.radius);
            circles.push(Circle { center: q, radius: r, schedule_index: m, inside_parent });
            next_m = m + 1;
        }
    }
    Ok(CircleSet { circles, schedule_exhausted: exhausted })
}

/// Fraction of `h`-grid midpoints of the unit square lying within
/// `delta` of the union of circle curves.
pub fn coverage_fraction(cs: &CircleSet, delta: f64, h: f64) -> Result<f64, PathologyError> {
    if !(delta > 0.0) {
        return Err(PathologyError::BadParameter("delta must be positive"));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(PathologyError::BadParameter("h must be in (0, 1)"));
    }
    let n = num::ceil(1.0 / h) as usize;
    let mut hits = 0u64;
    for j in 0..n {
        let y = (j as f64 + 0.5) / n as f64;
        for i in 0..n {
            let p = Point2::new((i as f64 + 0.5) / n as f64, y);
            if cs.distance(p) <= delta {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (n * n) as f64)
}

/// Polygonizes each circle with `points_per_circle` vertices, skipping
/// circles too small for their polygon vertices to be distinct doubles.
/// Returns the curves and the number of circles skipped.
pub fn polygonize(
    cs: &CircleSet,
    points_per_circle: usize,
) -> Result<(Vec<SampledCurve>, usize), PathologyError> {
    // below this, adjacent polygon vertices at coordinates ~0.5 collide
    const MIN_RADIUS: f64 = 1e-12;
    if points_per_circle < 3 {
        return Err(PathologyError::BadParameter("need at least 3 points per circle"));
    }
    let mut curves = Vec::new();
    let mut skipped = 0usize;
    for c in &cs.circles {
        if c.radius < MIN_RADIUS {
            skipped += 1;
            continue;
        }
        let curve = SampledCurve::circle(c.center, c.radius, points_per_circle)
            .map_err(|_| PathologyError::BadParameter("circle polygonization failed"))?;
        curves.push(curve);
    }
    Ok((curves, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_four_radii_are_exact() {
        assert_eq!(radius(1).unwrap(), 0.5);
        assert_eq!(radius(2).unwrap(), 0.125);
        assert_eq!(radius(3).unwrap(), 1.0 / 64.0);
        assert_eq!(radius(4).unwrap(), 1.0 / 1024.0);
    }

    #[test]
    fn radius_underflow_is_reported() {
        let m_max = max_schedule_index();
        assert!(radius(m_max).unwrap() > 0.0);
        let err = radius(m_max + 1).unwrap_err();
        assert!(matches!(err, PathologyError::ScheduleUnderflow { .. }));
    }

    #[test]
    fn schedule_is_strictly_decreasing() {
        let s = RadiusSchedule::new(20).unwrap();
        for w in s.radii.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn tail_ratio_beats_eps_for_all_m_up_to_20() {
        for m in 1..20 {
            let t = tail_ratio(m, 20).unwrap();
            let eps = num::exp2i(-(m as i32));
            assert!(t < eps, "m={} tail={} eps={}", m, t, eps);
        }
    }

    #[test]
    fn tail_ratio_first_term_dominates() {
        // m = 1: (1/8)^2/(1/2)^2 = 1/16 plus a far smaller remainder
        let t = tail_ratio(1, 20).unwrap();
        assert!(t > 0.0625 && t < 0.0626, "t={}", t);
        // one-term tail
        let t = tail_ratio(19, 20).unwrap();
        let exact = num::exp2i(2 * (schedule_exponent(19) - schedule_exponent(20)) as i32);
        assert_eq!(t, exact);
    }

    #[test]
    fn first_circle_sits_at_the_central_rational() {
        let cs = build_circle_set(1, 7).unwrap();
        assert_eq!(cs.circles.len(), 1);
        let c = cs.circles[0];
        assert_eq!((c.center.x, c.center.y), (0.5, 0.5));
        // r = 1/2 fails 3r < 1/2 against the square boundary, 1/8 passes
        assert_eq!(c.radius, 0.125);
        cs.validate().unwrap();
    }

    #[test]
    fn second_circle_is_smaller_and_clear() {
        let cs = build_circle_set(2, 7).unwrap();
        assert_eq!(cs.circles.len(), 2);
        assert!(cs.circles[1].radius < cs.circles[0].radius);
        cs.validate().unwrap();
    }

    #[test]
    fn built_sets_validate_up_to_40() {
        for n in [5usize, 10, 20, 40] {
            let cs = build_circle_set(n, 7).unwrap();
            assert_eq!(cs.circles.len(), n, "n={}", n);
            assert!(!cs.schedule_exhausted);
            cs.validate().unwrap();
        }
    }

    #[test]
    fn greedy_build_is_prefix_stable() {
        let big = build_circle_set(10, 7).unwrap();
        let small = build_circle_set(4, 7).unwrap();
        for (a, b) in small.circles.iter().zip(big.circles.iter()) {
            assert_eq!(a.center, b.center);
            assert_eq!(a.radius, b.radius);
        }
    }

    #[test]
    fn total_length_matches_radius_sum() {
        let cs = build_circle_set(3, 7).unwrap();
        let sum: f64 = cs.circles.iter().map(|c| c.radius).sum();
        let exact = 2.0 * core::f64::consts::PI * sum;
        assert!((cs.total_length() - exact).abs() < 1e-15);
    }

    #[test]
    fn coverage_matches_closed_form_for_one_circle() {
        // r = 1/8, delta = 1/4 > r: the covered set is the full disc of
        // radius r + delta = 3/8 around (1/2, 1/2), well inside the square
        let cs = build_circle_set(1, 7).unwrap();
        let delta = 0.25;
        let frac = coverage_fraction(&cs, delta, 1e-3).unwrap();
        let exact = core::f64::consts::PI * (0.125 + delta) * (0.125 + delta);
        assert!((frac - exact).abs() / exact < 0.02, "frac={} exact={}", frac, exact);
    }

    #[test]
    fn coverage_is_total_for_huge_delta() {
        let cs = build_circle_set(2, 7).unwrap();
        assert_eq!(coverage_fraction(&cs, 2.0, 0.01).unwrap(), 1.0);
    }

    #[test]
    fn coverage_nondecreasing_in_n() {
        let mut prev = 0.0;
        for n in [1usize, 2, 3, 5, 8] {
            let cs = build_circle_set(n, 7).unwrap();
            let frac = coverage_fraction(&cs, 0.05, 2e-3).unwrap();
            assert!(frac >= prev, "n={} frac={} prev={}", n, frac, prev);
            prev = frac;
        }
    }

    #[test]
    fn polygonize_skips_sub_representable_circles() {
        let cs = build_circle_set(10, 7).unwrap();
        let (curves, skipped) = polygonize(&cs, 512).unwrap();
        assert_eq!(curves.len() + skipped, 10);
        assert!(skipped > 0, "deep radii must be skipped");
        // the skipped circumference is negligible against the total
        let kept: f64 = curves.iter().map(|c| c.polyline_length()).sum();
        assert!((kept - cs.total_length()).abs() / cs.total_length() < 1e-3);
    }
}
