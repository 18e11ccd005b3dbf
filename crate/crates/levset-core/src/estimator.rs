//! Adaptive evaluation of the singular integral
//! `F(k) = (1/k) ∫_{B(0,2R)} (‖Df‖/|f|)^((k−1)/k) dx`,
//! whose limit as `k → ∞` is twice the `H^(n−1)` measure of the zero set
//! of `f`.
//!
//! The integrand concentrates on the zero set as `k` grows, so plain
//! quadrature stalls. Cells straddling the zero set instead use the exact
//! one-dimensional antiderivative `∫ |t|^(−(k−1)/k) dt = k·t^(1/k)`
//! across the band, with the zero set linearized inside the cell; cells
//! away from the zero set use a jittered midpoint rule on an adaptively
//! refined tree.

use alloc::vec::Vec;
use core::fmt;

use crate::expr::MAX_VARS;
use crate::fields::{FieldError, ScalarFieldHandle};
use crate::geometry::{GeometryError, SampledCurve};
use crate::num::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorError {
    Field(FieldError),
    Geometry(GeometryError),
    BadConfig(&'static str),
    /// the integrand was evaluated exactly on the zero set
    ZeroValue { point: [f64; 3] },
    NonFinite { point: [f64; 3] },
    /// `bound_diagnostics` refuses bands wider than the curve's reach
    EpsilonExceedsReach { epsilon: f64, reach: f64 },
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorError::Field(e) => write!(f, "{}", e),
            EstimatorError::Geometry(e) => write!(f, "{}", e),
            EstimatorError::BadConfig(what) => write!(f, "invalid configuration: {}", what),
            EstimatorError::ZeroValue { point } => {
                write!(f, "f vanishes at ({}, {}, {})", point[0], point[1], point[2])
            }
            EstimatorError::NonFinite { point } => {
                write!(f, "non-finite integrand near ({}, {}, {})", point[0], point[1], point[2])
            }
            EstimatorError::EpsilonExceedsReach { epsilon, reach } => {
                write!(
                    f,
                    "epsilon {} is not below the curve's reach estimate {}; normal lines may cross",
                    epsilon, reach
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EstimatorError {}

impl From<FieldError> for EstimatorError {
    fn from(e: FieldError) -> Self {
        EstimatorError::Field(e)
    }
}

impl From<GeometryError> for EstimatorError {
    fn from(e: GeometryError) -> Self {
        EstimatorError::Geometry(e)
    }
}

/// Parameters of the adaptive quadrature. The zero set must lie in
/// `B(0, R)`; integration runs over `B(0, 2R)`.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub r: f64,
    /// base grid resolution per axis over `[-2R, 2R]`
    pub base_cells: usize,
    pub max_depth: u32,
    /// refine while `diam × max ‖Df‖ ≥ refine_factor × min |f|`
    pub refine_factor: f64,
    pub k_schedule: Vec<u32>,
    pub jitter_seed: u64,
}

impl QuadratureConfig {
    pub fn new(r: f64) -> QuadratureConfig {
        QuadratureConfig {
            r,
            base_cells: 64,
            max_depth: 12,
            refine_factor: 4.0,
            k_schedule: alloc::vec![8, 32, 128, 512, 2048],
            jitter_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.r > 0.0) {
            return Err(EstimatorError::BadConfig("R must be positive"));
        }
        if self.base_cells < 1 {
            return Err(EstimatorError::BadConfig("base_cells must be at least 1"));
        }
        if self.max_depth < 1 {
            return Err(EstimatorError::BadConfig("max_depth must be at least 1"));
        }
        if !(self.refine_factor > 0.0) {
            return Err(EstimatorError::BadConfig("refine_factor must be positive"));
        }
        if self.k_schedule.is_empty() {
            return Err(EstimatorError::BadConfig("k_schedule must be nonempty"));
        }
        for w in self.k_schedule.windows(2) {
            if w[1] <= w[0] {
                return Err(EstimatorError::BadConfig("k_schedule must be strictly increasing"));
            }
        }
        if self.k_schedule[0] < 2 {
            return Err(EstimatorError::BadConfig("k_schedule entries must be at least 2"));
        }
        Ok(())
    }
}

/// `F_k` for one `k`, with cell accounting from the shared tree walk.
#[derive(Debug, Clone, Copy)]
pub struct FixedKResult {
    pub k: u32,
    pub f_k: f64,
    pub cells_used: u64,
    /// leaves where refinement was exhausted without a usable band model
    pub unresolved_cells: u64,
    /// leaves handled by the analytic near-band model
    pub band_cells: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateWarning {
    /// no cell straddled the zero set; the limit is a numerical zero
    EmptyZeroSet,
    UnresolvedCells { count: u64 },
    /// F(k) over the schedule is not eventually monotone
    NonMonotone,
    /// fewer than three schedule entries: limit taken at the largest k
    ExtrapolationFallback,
}

impl fmt::Display for EstimateWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateWarning::EmptyZeroSet => write!(f, "empty zero set in B(0,2R)"),
            EstimateWarning::UnresolvedCells { count } => {
                write!(f, "{} cells exhausted max_depth unresolved", count)
            }
            EstimateWarning::NonMonotone => write!(f, "F(k) not eventually monotone"),
            EstimateWarning::ExtrapolationFallback => {
                write!(f, "k_schedule too short to extrapolate; reporting F at max k")
            }
        }
    }
}

/// Full sweep result. `limit` is the extrapolated `F(∞)` from the model
/// `F(k) = F_∞ + c/k` fitted to the last three schedule entries; the
/// measure of the zero set is `h_measure = limit / 2`.
#[derive(Debug, Clone)]
pub struct MeasureEstimate {
    pub per_k: Vec<FixedKResult>,
    pub limit: f64,
    pub h_measure: f64,
    pub extrapolation_residual: f64,
    pub warnings: Vec<EstimateWarning>,
    pub diagnostics: Option<BoundReport>,
}

/// Sandwich-bound diagnostics along a traced zero curve.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub l: f64,
    pub epsilon: f64,
    pub samples: u32,
    pub sandwich_violations: u64,
    /// `((1 − ε κ̂)^(n−1), (1 + ε κ̂)^(n−1))`
    pub jacobian_band: (f64, f64),
    /// `Lε / min ‖D_z f‖` over the probed base points
    pub lipschitz_ratio: f64,
    /// the bounds are only informative when the ratio is small
    pub ratio_warning: bool,
}

/// The pointwise integrand `(‖Df(p)‖/|f(p)|)^((k−1)/k)`, computed in log
/// space for overflow safety.
pub fn integrand(f: &ScalarFieldHandle, p: &[f64], k: u32) -> Result<f64, EstimatorError> {
    if k < 1 {
        return Err(EstimatorError::BadConfig("k must be at least 1"));
    }
    let pr = f.probe(p)?;
    let v = num::abs(pr.value);
    if v == 0.0 {
        return Err(EstimatorError::ZeroValue { point: pad3(p) });
    }
    let e = (k - 1) as f64 / k as f64;
    if e == 0.0 {
        return Ok(1.0);
    }
    if pr.grad_norm == 0.0 {
        return Ok(0.0);
    }
    Ok(num::exp(e * (num::ln(pr.grad_norm) - num::ln(v))))
}

fn pad3(p: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..p.len().min(3)].copy_from_slice(&p[..p.len().min(3)]);
    out
}

/// Evaluates `F_k` for a single `k`. Prefer [`estimate_measure`] for a
/// schedule: the tree walk is shared across all `k` there.
pub fn integrate_fixed_k(
    f: &ScalarFieldHandle,
    cfg: &QuadratureConfig,
    k: u32,
) -> Result<FixedKResult, EstimatorError> {
    let mut r = integrate_schedule_with(f, cfg, &[k])?;
    Ok(r.pop().unwrap())
}

/// Runs the shared tree walk for every `k` in the config's schedule.
pub fn integrate_schedule(
    f: &ScalarFieldHandle,
    cfg: &QuadratureConfig,
) -> Result<Vec<FixedKResult>, EstimatorError> {
    integrate_schedule_with(f, cfg, &cfg.k_schedule)
}

fn integrate_schedule_with(
    f: &ScalarFieldHandle,
    cfg: &QuadratureConfig,
    ks: &[u32],
) -> Result<Vec<FixedKResult>, EstimatorError> {
    cfg.validate()?;
    if ks.is_empty() || ks.iter().any(|&k| k < 2) {
        return Err(EstimatorError::BadConfig("k values must be at least 2"));
    }
    let dim = f.dim();
    if dim != 2 && dim != 3 {
        return Err(EstimatorError::BadConfig("integration supports dimension 2 or 3"));
    }
    let mut walker = Walker {
        f,
        dim,
        cfg,
        ks,
        band_sums: alloc::vec![CompensatedSum::new(); ks.len()],
        mid_sums: alloc::vec![CompensatedSum::new(); ks.len()],
        cells_used: 0,
        unresolved: 0,
        band_cells: 0,
    };
    // base grid over [-2R, 2R]^dim, kept where the cell center lies in
    // the ball B(0, 2R)
    let n = cfg.base_cells;
    let side = 4.0 * cfg.r / n as f64;
    let hs = 0.5 * side;
    let ball2 = (2.0 * cfg.r) * (2.0 * cfg.r);
    let mut idx = [0usize; 3];
    loop {
        let mut c = [0.0f64; 3];
        let mut r2 = 0.0;
        for a in 0..dim {
            c[a] = -2.0 * cfg.r + (idx[a] as f64 + 0.5) * side;
            r2 += c[a] * c[a];
        }
        if r2 <= ball2 {
            walker.walk(c, hs, 0)?;
        }
        // odometer over dim axes
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == dim {
                break;
            }
        }
        if a == dim {
            break;
        }
    }
    let out = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| FixedKResult {
            k,
            f_k: walker.mid_sums[i].value() / k as f64 + walker.band_sums[i].value(),
            cells_used: walker.cells_used,
            unresolved_cells: walker.unresolved,
            band_cells: walker.band_cells,
        })
        .collect();
    Ok(out)
}

struct Walker<'a> {
    f: &'a ScalarFieldHandle,
    dim: usize,
    cfg: &'a QuadratureConfig,
    ks: &'a [u32],
    /// per-k sums of band-cell contributions to F_k (the 1/k is inside
    /// the antiderivative)
    band_sums: Vec<CompensatedSum>,
    /// per-k sums of midpoint contributions to k·F_k; divided by k once
    /// at the end
    mid_sums: Vec<CompensatedSum>,
    cells_used: u64,
    unresolved: u64,
    band_cells: u64,
}

impl Walker<'_> {
    fn walk(&mut self, c: [f64; 3], hs: f64, depth: u32) -> Result<(), EstimatorError> {
        let dim = self.dim;
        let corners = 1usize << dim;
        let mut min_abs = f64::INFINITY;
        let mut max_grad = 0.0f64;
        let mut any_pos = false;
        let mut any_neg = false;
        let record = |v: f64, g: f64, min_abs: &mut f64, max_grad: &mut f64| {
            *min_abs = min_abs.min(num::abs(v));
            *max_grad = max_grad.max(g);
        };
        let mut p = [0.0f64; MAX_VARS];
        for probe in 0..=corners {
            for a in 0..dim {
                p[a] = if probe == corners {
                    c[a]
                } else if probe >> a & 1 == 1 {
                    c[a] + hs
                } else {
                    c[a] - hs
                };
            }
            let pr = self.f.probe(&p[..dim])?;
            if !pr.value.is_finite() || !pr.grad_norm.is_finite() {
                return Err(EstimatorError::NonFinite { point: pad3(&p[..dim]) });
            }
            record(pr.value, pr.grad_norm, &mut min_abs, &mut max_grad);
            if pr.value > 0.0 {
                any_pos = true;
            }
            if pr.value < 0.0 {
                any_neg = true;
            }
        }
        let diam = 2.0 * hs * num::sqrt(dim as f64);
        let needs_refine = diam * max_grad >= self.cfg.refine_factor * min_abs;
        if needs_refine && depth < self.cfg.max_depth {
            let child_hs = 0.5 * hs;
            for child in 0..corners {
                let mut cc = c;
                for a in 0..dim {
                    cc[a] += if child >> a & 1 == 1 { child_hs } else { -child_hs };
                }
                self.walk(cc, child_hs, depth + 1)?;
            }
            return Ok(());
        }
        self.cells_used += 1;
        let sign_change = any_pos && any_neg;
        let unsigned_near =
            self.f.is_unsigned() && min_abs <= hs * num::sqrt(dim as f64) * max_grad.max(1.0);
        if (sign_change || unsigned_near) && self.band_cell(c, hs)? {
            self.band_cells += 1;
            return Ok(());
        }
        if needs_refine {
            self.unresolved += 1;
        }
        self.midpoint_cell(c, hs)
    }

    /// Semi-analytic band model: linearize the zero set inside the cell
    /// and integrate the singular profile exactly across the band.
    /// Returns false when the linearization says the zero set misses the
    /// cell, in which case the caller falls back to the midpoint rule.
    fn band_cell(&mut self, c: [f64; 3], hs: f64) -> Result<bool, EstimatorError> {
        let dim = self.dim;
        let mut grad = [0.0f64; MAX_VARS];
        self.f.gradient(&c[..dim], &mut grad[..dim])?;
        let f_c = self.f.evaluate(&c[..dim])?;
        let g_norm = num::norm(&grad[..dim]);
        if !(g_norm > 1e-300) {
            return Ok(false);
        }
        let mut n = [0.0f64; 3];
        for a in 0..dim {
            n[a] = grad[a] / g_norm;
        }
        // half-width of the cell in the normal direction
        let w = hs * (0..dim).map(|a| num::abs(n[a])).fold(0.0, |s, v| s + v);
        // signed offset of the linearized zero set from the cell center
        let s0_raw = -f_c / g_norm;
        if !(num::abs(s0_raw) < w) && !self.sign_change_hint(c, hs, &n, s0_raw) {
            return Ok(false);
        }
        let s0 = s0_raw.clamp(-0.999 * w, 0.999 * w);
        let cross = match dim {
            2 => chord_length_2d(hs, &n, s0),
            _ => section_area_3d(hs, &n, s0),
        };
        if cross <= 0.0 {
            return Ok(false);
        }
        for (i, &k) in self.ks.iter().enumerate() {
            let e = 1.0 / k as f64;
            let term = num::powf((w - s0).max(0.0), e) + num::powf((w + s0).max(0.0), e);
            self.band_sums[i].add(cross * term);
        }
        Ok(true)
    }

    /// When the center linearization places the zero set outside the cell
    /// but the probes saw a sign change, the zero set is genuinely inside
    /// and the offset is clamped rather than rejected.
    fn sign_change_hint(&self, _c: [f64; 3], _hs: f64, _n: &[f64; 3], s0: f64) -> bool {
        // a signed field reaching this path always had a sign change;
        // unsigned fields cannot, so a far-out s0 means "not in this cell"
        !self.f.is_unsigned() && s0.is_finite()
    }

    fn midpoint_cell(&mut self, c: [f64; 3], hs: f64) -> Result<(), EstimatorError> {
        let dim = self.dim;
        let side = 2.0 * hs;
        let mut area = 1.0;
        for _ in 0..dim {
            area *= side;
        }
        let mut h = self.cfg.jitter_seed;
        for a in 0..dim {
            h = num::splitmix64(h ^ c[a].to_bits());
        }
        let mut p = [0.0f64; MAX_VARS];
        for attempt in 0..16u32 {
            for a in 0..dim {
                h = num::splitmix64(h);
                p[a] = c[a] + (num::unit_f64(h) - 0.5) * 0.5 * side;
            }
            let pr = self.f.probe(&p[..dim])?;
            let v = num::abs(pr.value);
            if v == 0.0 {
                // jitter again; an exact zero at a jittered node is a
                // measure-zero accident
                let _ = attempt;
                continue;
            }
            let log_rho = if pr.grad_norm == 0.0 {
                f64::NEG_INFINITY
            } else {
                num::ln(pr.grad_norm) - num::ln(v)
            };
            for (i, &k) in self.ks.iter().enumerate() {
                let e = (k - 1) as f64 / k as f64;
                let val = if log_rho == f64::NEG_INFINITY { 0.0 } else { num::exp(e * log_rho) };
                if !val.is_finite() {
                    return Err(EstimatorError::NonFinite { point: pad3(&p[..dim]) });
                }
                self.mid_sums[i].add(area * val);
            }
            return Ok(());
        }
        Err(EstimatorError::ZeroValue { point: pad3(&c[..self.dim]) })
    }
}

/// Length of the chord `{p : <p, n> = s0}` clipped to the square
/// `[-hs, hs]^2`.
fn chord_length_2d(hs: f64, n: &[f64; 3], s0: f64) -> f64 {
    let d = [-n[1], n[0]];
    let o = [s0 * n[0], s0 * n[1]];
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for a in 0..2 {
        if num::abs(d[a]) < 1e-15 {
            if num::abs(o[a]) > hs {
                return 0.0;
            }
            continue;
        }
        let t1 = (-hs - o[a]) / d[a];
        let t2 = (hs - o[a]) / d[a];
        lo = lo.max(t1.min(t2));
        hi = hi.min(t1.max(t2));
    }
    (hi - lo).max(0.0)
}

/// Area of the polygon `{p : <p, n> = s0}` clipped to the cube
/// `[-hs, hs]^3`: intersect the plane with the 12 cube edges, order the
/// hits angularly in-plane, apply the shoelace formula.
fn section_area_3d(hs: f64, n: &[f64; 3], s0: f64) -> f64 {
    let corner = |mask: usize| {
        [
            if mask & 1 == 1 { hs } else { -hs },
            if mask & 2 == 2 { hs } else { -hs },
            if mask & 4 == 4 { hs } else { -hs },
        ]
    };
    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(6);
    for mask in 0..8usize {
        for axis in 0..3usize {
            if mask & (1 << axis) != 0 {
                continue;
            }
            let a = corner(mask);
            let b = corner(mask | (1 << axis));
            let da = a[0] * n[0] + a[1] * n[1] + a[2] * n[2] - s0;
            let db = b[0] * n[0] + b[1] * n[1] + b[2] * n[2] - s0;
            if (da < 0.0) != (db < 0.0) {
                let t = da / (da - db);
                pts.push([
                    a[0] + t * (b[0] - a[0]),
                    a[1] + t * (b[1] - a[1]),
                    a[2] + t * (b[2] - a[2]),
                ]);
            }
        }
    }
    if pts.len() < 3 {
        return 0.0;
    }
    // in-plane orthonormal basis
    let pick = if num::abs(n[0]) <= num::abs(n[1]) && num::abs(n[0]) <= num::abs(n[2]) {
        [1.0, 0.0, 0.0]
    } else if num::abs(n[1]) <= num::abs(n[2]) {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let dot = pick[0] * n[0] + pick[1] * n[1] + pick[2] * n[2];
    let mut e1 = [pick[0] - dot * n[0], pick[1] - dot * n[1], pick[2] - dot * n[2]];
    let e1n = num::norm(&e1);
    for v in e1.iter_mut() {
        *v /= e1n;
    }
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    let mut uv: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|p| {
            let u = p[0] * e1[0] + p[1] * e1[1] + p[2] * e1[2];
            let v = p[0] * e2[0] + p[1] * e2[1] + p[2] * e2[2];
            (num::atan2(v, u), u, v)
        })
        .collect();
    uv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut area2 = 0.0;
    for i in 0..uv.len() {
        let (_, u1, v1) = uv[i];
        let (_, u2, v2) = uv[(i + 1) % uv.len()];
        area2 += u1 * v2 - u2 * v1;
    }
    num::abs(area2) * 0.5
}

/// Least-squares fit of `F(k) = F_∞ + c/k` over `(k, F_k)` pairs.
/// Returns the limit and the maximum fit deviation.
pub(crate) fn fit_limit(data: &[(u32, f64)]) -> (f64, f64) {
    debug_assert!(data.len() >= 2);
    let n = data.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(k, fk) in data {
        let x = 1.0 / k as f64;
        sx += x;
        sy += fk;
        sxx += x * x;
        sxy += x * fk;
    }
    let det = n * sxx - sx * sx;
    if num::abs(det) < 1e-300 {
        let last = data[data.len() - 1].1;
        return (last, 0.0);
    }
    let a = (sy * sxx - sx * sxy) / det;
    let b = (n * sxy - sx * sy) / det;
    let mut residual = 0.0f64;
    for &(k, fk) in data {
        residual = residual.max(num::abs(a + b / k as f64 - fk));
    }
    (a, residual)
}

/// Runs the schedule, extrapolates the `k → ∞` limit, and reports the
/// measure `h_measure = limit / 2`.
pub fn estimate_measure(
    f: &ScalarFieldHandle,
    cfg: &QuadratureConfig,
) -> Result<MeasureEstimate, EstimatorError> {
    let per_k = integrate_schedule(f, cfg)?;
    let mut warnings = Vec::new();
    let last = &per_k[per_k.len() - 1];
    if last.band_cells == 0 {
        warnings.push(EstimateWarning::EmptyZeroSet);
    }
    if last.unresolved_cells > 0 {
        warnings.push(EstimateWarning::UnresolvedCells { count: last.unresolved_cells });
    }
    let (limit, residual) = if per_k.len() >= 3 {
        let tail: Vec<(u32, f64)> =
            per_k[per_k.len() - 3..].iter().map(|r| (r.k, r.f_k)).collect();
        fit_limit(&tail)
    } else {
        warnings.push(EstimateWarning::ExtrapolationFallback);
        let residual = if per_k.len() == 2 {
            num::abs(per_k[1].f_k - per_k[0].f_k)
        } else {
            0.0
        };
        (last.f_k, residual)
    };
    if per_k.len() >= 3 {
        let a = per_k[per_k.len() - 3].f_k;
        let b = per_k[per_k.len() - 2].f_k;
        let c = per_k[per_k.len() - 1].f_k;
        if (b - a) * (c - b) < 0.0 {
            warnings.push(EstimateWarning::NonMonotone);
        }
    }
    Ok(MeasureEstimate {
        per_k,
        limit,
        h_measure: (limit / 2.0).max(0.0),
        extrapolation_residual: residual,
        warnings,
        diagnostics: None,
    })
}

/// Checks the derivative sandwich along a traced zero curve of an
/// analytic field: for `z` on the zero set and `|t| ≤ ε`,
/// `‖D_z f‖ ∓ Lε` must bracket both `‖Df(z + t n)‖` and `|f(z + t n)|/|t|`,
/// where `L` bounds the Lipschitz constant of `Df`.
pub fn bound_diagnostics(
    f: &ScalarFieldHandle,
    curve: &SampledCurve,
    l: f64,
    epsilon: f64,
    samples: u32,
) -> Result<BoundReport, EstimatorError> {
    if !(l > 0.0) {
        return Err(EstimatorError::BadConfig("L must be positive"));
    }
    if !(epsilon >= 0.0) {
        return Err(EstimatorError::BadConfig("epsilon must be nonnegative"));
    }
    if samples == 0 {
        return Err(EstimatorError::BadConfig("samples must be positive"));
    }
    if f.dim() != 2 {
        return Err(EstimatorError::BadConfig("bound diagnostics are two-dimensional"));
    }
    let reach = curve.reach_estimate()?;
    if epsilon >= reach.reach {
        return Err(EstimatorError::EpsilonExceedsReach { epsilon, reach: reach.reach });
    }
    let pts = curve.points();
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut violations = 0u64;
    let mut min_dz = f64::INFINITY;
    // absolute slack for pure rounding noise at t near 0
    let slack = 1e-9;
    for _ in 0..samples {
        state = num::splitmix64(state);
        let z0 = pts[(state % pts.len() as u64) as usize];
        // polish the polyline vertex onto the analytic zero set
        let mut z = [z0.x, z0.y];
        let mut grad = [0.0f64; 2];
        for _ in 0..8 {
            let v = f.evaluate(&z)?;
            f.gradient(&z, &mut grad)?;
            let g2 = grad[0] * grad[0] + grad[1] * grad[1];
            if g2 < 1e-300 {
                break;
            }
            z[0] -= v * grad[0] / g2;
            z[1] -= v * grad[1] / g2;
            if num::abs(v) < 1e-14 {
                break;
            }
        }
        f.gradient(&z, &mut grad)?;
        let dz = num::hypot(grad[0], grad[1]);
        if dz < 1e-300 {
            violations += 1;
            continue;
        }
        min_dz = min_dz.min(dz);
        let n = [grad[0] / dz, grad[1] / dz];
        state = num::splitmix64(state);
        let t = (2.0 * num::unit_f64(state) - 1.0) * epsilon;
        let p = [z[0] + t * n[0], z[1] + t * n[1]];
        let g_p = f.gradient_norm(&p)?;
        let v_p = num::abs(f.evaluate(&p)?);
        let lo = dz - l * epsilon;
        let hi = dz + l * epsilon;
        let grad_ok = lo - slack <= g_p && g_p <= hi + slack;
        let t_abs = num::abs(t);
        let val_ok =
            lo * t_abs - slack <= v_p && v_p <= hi * t_abs + slack;
        if !(grad_ok && val_ok) {
            violations += 1;
        }
    }
    let kappa = reach.kappa_hat;
    let nm1 = (f.dim() - 1) as i32;
    let jacobian_band = (
        num::powf((1.0 - epsilon * kappa).max(0.0), nm1 as f64),
        num::powf(1.0 + epsilon * kappa, nm1 as f64),
    );
    let lipschitz_ratio = l * epsilon / min_dz;
    Ok(BoundReport {
        l,
        epsilon,
        samples,
        sandwich_violations: violations,
        jacobian_band,
        lipschitz_ratio,
        ratio_warning: lipschitz_ratio > 0.1,
    })
}
