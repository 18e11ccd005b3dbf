//! Uniform-grid spatial index over curve segments for fast nearest-point
//! queries. Built once, read-only afterwards.

use alloc::vec::Vec;

use super::{point_segment, Point2, SampledCurve};
use crate::num;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: Point2,
    b: Point2,
    curve: u32,
    index: u32,
}

/// Static bucket grid over segments of one or more curves.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    segments: Vec<Segment>,
    buckets: Vec<Vec<u32>>,
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
}

impl SegmentIndex {
    pub fn build(curves: &[SampledCurve]) -> SegmentIndex {
        let mut segments = Vec::new();
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut total_len = 0.0;
        for (ci, c) in curves.iter().enumerate() {
            for si in 0..c.segment_count() {
                let (a, b) = c.segment(si);
                segments.push(Segment { a, b, curve: ci as u32, index: si as u32 });
                total_len += a.dist(b);
                for p in [a, b] {
                    min.x = min.x.min(p.x);
                    min.y = min.y.min(p.y);
                    max.x = max.x.max(p.x);
                    max.y = max.y.max(p.y);
                }
            }
        }
        assert!(!segments.is_empty(), "index needs at least one segment");
        let mean_seg = total_len / segments.len() as f64;
        let span = (max.x - min.x).max(max.y - min.y).max(1e-300);
        // cell comparable to a segment so buckets stay small, but never so
        // fine that the grid explodes
        let cell = mean_seg.max(span / 512.0).max(1e-300);
        let nx = ((max.x - min.x) / cell) as usize + 1;
        let ny = ((max.y - min.y) / cell) as usize + 1;
        let mut buckets = alloc::vec![Vec::new(); nx * ny];
        for (id, s) in segments.iter().enumerate() {
            let ix0 = (((s.a.x.min(s.b.x)) - min.x) / cell) as usize;
            let ix1 = (((s.a.x.max(s.b.x)) - min.x) / cell) as usize;
            let iy0 = (((s.a.y.min(s.b.y)) - min.y) / cell) as usize;
            let iy1 = (((s.a.y.max(s.b.y)) - min.y) / cell) as usize;
            for iy in iy0..=iy1.min(ny - 1) {
                for ix in ix0..=ix1.min(nx - 1) {
                    buckets[iy * nx + ix].push(id as u32);
                }
            }
        }
        SegmentIndex { segments, buckets, origin: min, cell, nx, ny }
    }

    /// Nearest point on any indexed segment: `(distance, foot, curve, segment)`.
    pub fn nearest(&self, p: Point2) -> (f64, Point2, usize, usize) {
        // clamp the query into the grid; d_out is the gap this introduces
        // and enters the ring lower bound below
        let qx = p.x.clamp(self.origin.x, self.origin.x + self.nx as f64 * self.cell);
        let qy = p.y.clamp(self.origin.y, self.origin.y + self.ny as f64 * self.cell);
        let d_out = num::hypot(p.x - qx, p.y - qy);
        let cx = (num::floor((qx - self.origin.x) / self.cell) as i64).clamp(0, self.nx as i64 - 1);
        let cy = (num::floor((qy - self.origin.y) / self.cell) as i64).clamp(0, self.ny as i64 - 1);
        let mut best = f64::INFINITY;
        let mut best_seg = 0usize;
        let mut best_t = 0.0;
        let max_ring = self.nx.max(self.ny) as i64 + 1;
        for ring in 0..=max_ring {
            // cells in ring r are >= (r-1) cells from the clamped point,
            // and the whole grid is >= d_out from p
            let lateral = ((ring - 1).max(0)) as f64 * self.cell;
            if num::hypot(d_out, lateral) > best {
                break;
            }
            let scan = |ix: i64, iy: i64, best: &mut f64, best_seg: &mut usize, best_t: &mut f64| {
                if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
                    return;
                }
                for &id in &self.buckets[iy as usize * self.nx + ix as usize] {
                    let s = &self.segments[id as usize];
                    let (d, t) = point_segment(p, s.a, s.b);
                    if d < *best || (d == *best && (id as usize) < *best_seg) {
                        *best = d;
                        *best_seg = id as usize;
                        *best_t = t;
                    }
                }
            };
            if ring == 0 {
                scan(cx, cy, &mut best, &mut best_seg, &mut best_t);
            } else {
                for ix in (cx - ring)..=(cx + ring) {
                    scan(ix, cy - ring, &mut best, &mut best_seg, &mut best_t);
                    scan(ix, cy + ring, &mut best, &mut best_seg, &mut best_t);
                }
                for iy in (cy - ring + 1)..(cy + ring) {
                    scan(cx - ring, iy, &mut best, &mut best_seg, &mut best_t);
                    scan(cx + ring, iy, &mut best, &mut best_seg, &mut best_t);
                }
            }
        }
        let s = &self.segments[best_seg];
        let foot = Point2::new(
            s.a.x + best_t * (s.b.x - s.a.x),
            s.a.y + best_t * (s.b.y - s.a.y),
        );
        (best, foot, s.curve as usize, s.index as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_agrees_with_brute_force() {
        let c = SampledCurve::circle(Point2::new(0.3, -0.2), 1.0, 797).unwrap();
        let idx = SegmentIndex::build(core::slice::from_ref(&c));
        let mut state = 11u64;
        for _ in 0..500 {
            state = num::splitmix64(state);
            let x = num::unit_f64(state) * 6.0 - 3.0;
            state = num::splitmix64(state);
            let y = num::unit_f64(state) * 6.0 - 3.0;
            let p = Point2::new(x, y);
            let (d_idx, _, _, seg_idx) = idx.nearest(p);
            let (d_bf, _, seg_bf) = c.distance_and_foot(p);
            assert!((d_idx - d_bf).abs() < 1e-12, "at ({}, {})", x, y);
            assert_eq!(seg_idx, seg_bf);
        }
    }

    #[test]
    fn index_over_multiple_curves() {
        let a = SampledCurve::circle(Point2::new(-2.0, 0.0), 0.5, 64).unwrap();
        let b = SampledCurve::circle(Point2::new(2.0, 0.0), 0.5, 64).unwrap();
        let idx = SegmentIndex::build(&[a.clone(), b.clone()]);
        let (d, _, curve, _) = idx.nearest(Point2::new(1.9, 0.0));
        assert_eq!(curve, 1);
        let (d_bf, _, _) = b.distance_and_foot(Point2::new(1.9, 0.0));
        assert!((d - d_bf).abs() < 1e-14);
        let (_, _, curve, _) = idx.nearest(Point2::new(-3.0, 0.1));
        assert_eq!(curve, 0);
    }

    #[test]
    fn far_away_query_terminates() {
        let c = SampledCurve::circle(Point2::new(0.0, 0.0), 1.0, 16).unwrap();
        let idx = SegmentIndex::build(core::slice::from_ref(&c));
        let (d, _, _, _) = idx.nearest(Point2::new(1e4, -1e4));
        let (d_bf, _, _) = c.distance_and_foot(Point2::new(1e4, -1e4));
        assert!((d - d_bf).abs() < 1e-9);
    }
}
