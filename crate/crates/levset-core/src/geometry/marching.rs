//! Marching-squares contour extraction of the zero level set of a scalar
//! field, with linear interpolation along grid edges and exact edge-key
//! stitching of the resulting segments.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Point2, Rect, SampledCurve};
use crate::fields::{FieldError, ScalarFieldHandle};

/// Grid-edge identifier: the edge starting at node `(i, j)`, horizontal or
/// vertical. Keys make segment endpoints exactly shareable across cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    H(u32, u32),
    V(u32, u32),
}

/// Traces the zero level set of `f` (dim 2) inside `bbox` on an `h` grid.
///
/// Ambiguous saddle cells are resolved by sampling the cell center. An
/// empty result means no zero crossing was found, which is a valid
/// outcome for fields without a zero set in the box.
pub fn zero_set_trace(
    f: &ScalarFieldHandle,
    bbox: Rect,
    h: f64,
) -> Result<Vec<SampledCurve>, FieldError> {
    if f.dim() != 2 {
        return Err(FieldError::DimensionMismatch { expected: 2, got: f.dim() });
    }
    if h <= 0.0 || bbox.max.x <= bbox.min.x || bbox.max.y <= bbox.min.y {
        return Err(FieldError::BadParameter("trace needs h > 0 and a nonempty box"));
    }
    let nx = libm::ceil((bbox.max.x - bbox.min.x) / h) as u32;
    let ny = libm::ceil((bbox.max.y - bbox.min.y) / h) as u32;
    let node = |i: u32, j: u32| Point2::new(bbox.min.x + i as f64 * h, bbox.min.y + j as f64 * h);

    let mut values = Vec::with_capacity(((nx + 1) * (ny + 1)) as usize);
    for j in 0..=ny {
        for i in 0..=nx {
            let p = node(i, j);
            values.push(f.evaluate(&[p.x, p.y])?);
        }
    }
    let value = |i: u32, j: u32| values[(j * (nx + 1) + i) as usize];
    let inside = |v: f64| v < 0.0;

    // crossing point on an edge, by linear interpolation
    let mut points: BTreeMap<EdgeKey, Point2> = BTreeMap::new();
    let cross = |key: EdgeKey, points: &mut BTreeMap<EdgeKey, Point2>| {
        points.entry(key).or_insert_with(|| {
            let ((i, j), horizontal) = match key {
                EdgeKey::H(i, j) => ((i, j), true),
                EdgeKey::V(i, j) => ((i, j), false),
            };
            let a = node(i, j);
            let (v0, v1, b) = if horizontal {
                (value(i, j), value(i + 1, j), node(i + 1, j))
            } else {
                (value(i, j), value(i, j + 1), node(i, j + 1))
            };
            let t = v0 / (v0 - v1);
            Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        });
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let b0 = inside(value(i, j));
            let b1 = inside(value(i + 1, j));
            let b2 = inside(value(i + 1, j + 1));
            let b3 = inside(value(i, j + 1));
            let case =
                (b0 as u8) | ((b1 as u8) << 1) | ((b2 as u8) << 2) | ((b3 as u8) << 3);
            if case == 0 || case == 15 {
                continue;
            }
            let bottom = EdgeKey::H(i, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let right = EdgeKey::V(i + 1, j);
            let mut emit = |a: EdgeKey, b: EdgeKey, segments: &mut Vec<(EdgeKey, EdgeKey)>| {
                cross(a, &mut points);
                cross(b, &mut points);
                segments.push((a, b));
            };
            match case {
                1 => emit(left, bottom, &mut segments),
                2 => emit(bottom, right, &mut segments),
                3 => emit(left, right, &mut segments),
                4 => emit(right, top, &mut segments),
                6 => emit(bottom, top, &mut segments),
                7 => emit(left, top, &mut segments),
                8 => emit(top, left, &mut segments),
                9 => emit(bottom, top, &mut segments),
                11 => emit(right, top, &mut segments),
                12 => emit(left, right, &mut segments),
                13 => emit(bottom, right, &mut segments),
                14 => emit(left, bottom, &mut segments),
                5 | 10 => {
                    let c = node(i, j);
                    let center =
                        f.evaluate(&[c.x + 0.5 * h, c.y + 0.5 * h])?;
                    let center_in = inside(center);
                    let pairs = if case == 5 {
                        // corners (0,0) and (1,1) inside
                        if center_in {
                            [(bottom, right), (top, left)]
                        } else {
                            [(bottom, left), (top, right)]
                        }
                    } else {
                        // corners (1,0) and (0,1) inside
                        if center_in {
                            [(bottom, left), (top, right)]
                        } else {
                            [(bottom, right), (top, left)]
                        }
                    };
                    for (a, b) in pairs {
                        emit(a, b, &mut segments);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    Ok(stitch(&segments, &points, h))
}

/// Joins marching segments into polylines by walking the edge-key graph.
fn stitch(
    segments: &[(EdgeKey, EdgeKey)],
    points: &BTreeMap<EdgeKey, Point2>,
    h: f64,
) -> Vec<SampledCurve> {
    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (id, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(id);
        adjacency.entry(*b).or_default().push(id);
    }
    let mut used = alloc::vec![false; segments.len()];
    let mut curves = Vec::new();

    let walk = |start: EdgeKey, used: &mut [bool], curves: &mut Vec<SampledCurve>| {
        let mut chain = alloc::vec![start];
        let mut here = start;
        loop {
            let next_seg = adjacency[&here].iter().copied().find(|&s| !used[s]);
            let Some(s) = next_seg else { break };
            used[s] = true;
            let (a, b) = segments[s];
            here = if a == here { b } else { a };
            chain.push(here);
        }
        let closed = chain.len() > 2 && chain.first() == chain.last();
        if closed {
            chain.pop();
        }
        // drop interpolation duplicates (crossings collapsing onto a node)
        let mut pts: Vec<Point2> = Vec::with_capacity(chain.len());
        for key in chain {
            let p = points[&key];
            if pts.last().map_or(true, |q| q.dist(p) > 1e-9 * h) {
                pts.push(p);
            }
        }
        if closed && pts.len() > 1 && pts[0].dist(*pts.last().unwrap()) <= 1e-9 * h {
            pts.pop();
        }
        let enough = if closed { pts.len() >= 3 } else { pts.len() >= 2 };
        if enough {
            if let Ok(c) = SampledCurve::new(pts, closed) {
                curves.push(c);
            }
        }
    };

    // open chains first, from the degree-1 endpoints
    let endpoints: Vec<EdgeKey> = adjacency
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    for key in endpoints {
        if adjacency[&key].iter().any(|&s| !used[s]) {
            walk(key, &mut used, &mut curves);
        }
    }
    // remaining components are loops
    for id in 0..segments.len() {
        if !used[id] {
            walk(segments[id].0, &mut used, &mut curves);
        }
    }
    curves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::fields::ScalarFieldHandle;

    fn analytic(src: &str) -> ScalarFieldHandle {
        ScalarFieldHandle::analytic(Expression::parse(src, 2).unwrap())
    }

    fn box2(a: f64, b: f64) -> Rect {
        Rect::new(Point2::new(a, a), Point2::new(b, b))
    }

    #[test]
    fn paraboloid_traces_to_unit_circle() {
        let f = analytic("x^2+y^2-1");
        let curves = zero_set_trace(&f, box2(-2.0, 2.0), 0.01).unwrap();
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.is_closed());
        let len = c.polyline_length();
        let exact = 2.0 * core::f64::consts::PI;
        assert!((len - exact).abs() / exact < 0.005, "len {}", len);
    }

    #[test]
    fn no_zero_set_gives_empty_list() {
        let f = analytic("x^2+y^2+1");
        let curves = zero_set_trace(&f, box2(-2.0, 2.0), 0.05).unwrap();
        assert!(curves.is_empty());
    }

    #[test]
    fn saddle_resolves_to_two_curves() {
        let f = analytic("x*y");
        let curves = zero_set_trace(&f, box2(-1.0, 0.99), 0.23).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert!(!c.is_closed());
        }
    }

    #[test]
    fn traced_points_are_near_the_zero_set() {
        let f = analytic("x^2+y^2-1");
        let h = 0.02;
        let curves = zero_set_trace(&f, box2(-1.5, 1.5), h).unwrap();
        let max_grad = 2.0 * 1.1;
        for c in &curves {
            for p in c.points() {
                let v = f.evaluate(&[p.x, p.y]).unwrap();
                assert!(v.abs() <= 2.0 * h * max_grad, "|f|={} at ({},{})", v, p.x, p.y);
            }
        }
    }
}
