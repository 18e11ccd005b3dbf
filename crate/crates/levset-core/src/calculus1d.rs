//! One-variable diagnostics built on the logarithmic-derivative ratio
//! `A_f = |f'/f|`: a bound check `|f'| <= lambda |f|`, the exponential
//! fence it implies, and a grid-based root detector.

use alloc::vec::Vec;

use crate::expr::{EvalError, Expression};
use crate::num;

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Calculus1dError {
    Eval(EvalError),
    BadParameter(&'static str),
    /// `fence_check` requires `f > 0` on the whole interval; carries the
    /// first grid point where positivity fails.
    NotPositive { x: f64 },
    /// `fence_check` requires the lambda bound to hold first; carries the
    /// observed worst ratio.
    LambdaBoundFails { worst_ratio: f64 },
}

impl fmt::Display for Calculus1dError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Calculus1dError::Eval(e) => write!(f, "{}", e),
            Calculus1dError::BadParameter(what) => write!(f, "invalid parameter: {}", what),
            Calculus1dError::NotPositive { x } => {
                write!(f, "f is not strictly positive on the interval (f(x) <= 0 at x = {})", x)
            }
            Calculus1dError::LambdaBoundFails { worst_ratio } => {
                write!(f, "|f'| <= lambda |f| fails on the interval (worst ratio {})", worst_ratio)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Calculus1dError {}

impl From<EvalError> for Calculus1dError {
    fn from(e: EvalError) -> Self {
        Calculus1dError::Eval(e)
    }
}

/// Tabulated `f` and `f'` on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct Samples1D {
    pub xs: Vec<f64>,
    pub fs: Vec<f64>,
    pub dfs: Vec<f64>,
}

impl Samples1D {
    /// Samples `e` and its derivative on the uniform `n+1`-node grid
    /// over `[a, b]`.
    pub fn tabulate(
        e: &Expression,
        a: f64,
        b: f64,
        n: usize,
    ) -> Result<Samples1D, Calculus1dError> {
        if e.dim() != 1 {
            return Err(Calculus1dError::BadParameter("expression must have one variable"));
        }
        if !(a < b) {
            return Err(Calculus1dError::BadParameter("interval must satisfy a < b"));
        }
        if n < 2 {
            return Err(Calculus1dError::BadParameter("n must be at least 2"));
        }
        let mut xs = Vec::with_capacity(n + 1);
        let mut fs = Vec::with_capacity(n + 1);
        let mut dfs = Vec::with_capacity(n + 1);
        for i in 0..=n {
            // endpoint hit exactly so positivity checks see b itself
            let x = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            let g = e.eval_with_gradient(&[x])?;
            xs.push(x);
            fs.push(g.value);
            dfs.push(g.gradient()[0]);
        }
        Ok(Samples1D { xs, fs, dfs })
    }
}

/// Outcome of the pointwise bound `|f'| <= lambda |f|`.
#[derive(Debug, Clone, Copy)]
pub struct LambdaBoundReport {
    pub holds: bool,
    pub worst_x: f64,
    /// max of `|f'|/|f|` over the grid; infinite where `f = 0`, `f' != 0`.
    pub worst_ratio: f64,
}

/// Checks `|f'(x)| <= lambda |f(x)|` on a uniform `n`-interval grid.
pub fn lambda_bound_check(
    e: &Expression,
    a: f64,
    b: f64,
    lambda: f64,
    n: usize,
) -> Result<LambdaBoundReport, Calculus1dError> {
    if lambda < 0.0 {
        return Err(Calculus1dError::BadParameter("lambda must be nonnegative"));
    }
    let s = Samples1D::tabulate(e, a, b, n)?;
    let mut holds = true;
    let mut worst_x = s.xs[0];
    let mut worst_ratio = 0.0;
    for i in 0..s.xs.len() {
        let (f, df) = (s.fs[i], s.dfs[i]);
        if num::abs(df) > lambda * num::abs(f) {
            holds = false;
        }
        let ratio = if f == 0.0 {
            if df == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            num::abs(df / f)
        };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_x = s.xs[i];
        }
    }
    Ok(LambdaBoundReport { holds, worst_x, worst_ratio })
}

/// Outcome of the exponential fence
/// `e^(-lambda (x1-x0)) <= f(x1)/f(x0) <= e^(lambda (x1-x0))`.
#[derive(Debug, Clone, Copy)]
pub struct FenceReport {
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Verifies the exponential fences implied by the lambda bound.
///
/// Refuses when `f` is not strictly positive on a 1024-node grid over
/// `[x0, x1]`, or when the lambda bound itself fails there — in both
/// cases the fence hypothesis is void, not merely violated.
pub fn fence_check(
    e: &Expression,
    x0: f64,
    x1: f64,
    lambda: f64,
) -> Result<FenceReport, Calculus1dError> {
    const GRID: usize = 1024;
    let s = Samples1D::tabulate(e, x0, x1, GRID)?;
    for i in 0..s.xs.len() {
        if !(s.fs[i] > 0.0) {
            return Err(Calculus1dError::NotPositive { x: s.xs[i] });
        }
    }
    let bound = lambda_bound_check(e, x0, x1, lambda, GRID)?;
    if !bound.holds {
        return Err(Calculus1dError::LambdaBoundFails { worst_ratio: bound.worst_ratio });
    }
    let delta = x1 - x0;
    let lower = num::exp(-lambda * delta);
    let upper = num::exp(lambda * delta);
    let ratio = e.eval(&[x1])? / e.eval(&[x0])?;
    Ok(FenceReport { lower, ratio, upper, holds: lower <= ratio && ratio <= upper })
}

/// Scans `A_f = |f'/f|` on a uniform grid and merges consecutive
/// super-threshold nodes into closed intervals. Nodes with `f = 0`,
/// `f' = 0` are indeterminate and excluded; neighbors still flag a root
/// of even order.
pub fn root_detector(
    e: &Expression,
    a: f64,
    b: f64,
    threshold: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>, Calculus1dError> {
    if n < 16 {
        return Err(Calculus1dError::BadParameter("n must be at least 16"));
    }
    if !(threshold > 0.0) {
        return Err(Calculus1dError::BadParameter("threshold must be positive"));
    }
    let s = Samples1D::tabulate(e, a, b, n)?;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = None;
    for i in 0..s.xs.len() {
        let (f, df) = (s.fs[i], s.dfs[i]);
        let hot = if f == 0.0 {
            // exact zero: A_f blows up unless f' vanishes too (indeterminate)
            df != 0.0
        } else {
            num::abs(df / f) > threshold
        };
        if hot {
            open.get_or_insert(s.xs[i]);
        } else if let Some(start) = open.take() {
            intervals.push((start, s.xs[i - 1]));
        }
    }
    if let Some(start) = open {
        intervals.push((start, *s.xs.last().unwrap()));
    }
    Ok(intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;

    fn parse1(src: &str) -> Expression {
        Expression::parse(src, 1).unwrap()
    }

    #[test]
    fn exp_saturates_the_lambda_bound() {
        let r = lambda_bound_check(&parse1("exp(x)"), 0.0, 1.0, 1.0, 256).unwrap();
        assert!(r.holds);
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sin_fails_near_pi() {
        let r = lambda_bound_check(&parse1("sin(x)"), 3.0, 3.3, 10.0, 512).unwrap();
        assert!(!r.holds);
        assert!((r.worst_x - core::f64::consts::PI).abs() < 0.1);
        assert!(r.worst_ratio > 10.0);
    }

    #[test]
    fn zero_function_satisfies_any_lambda() {
        let r = lambda_bound_check(&parse1("x*0"), -1.0, 1.0, 0.0, 64).unwrap();
        assert!(r.holds);
        assert_eq!(r.worst_ratio, 0.0);
    }

    #[test]
    fn fence_for_half_exponential() {
        let r = fence_check(&parse1("exp(x/2)"), 0.0, 2.0, 1.0).unwrap();
        assert!(r.holds);
        assert!((r.ratio - core::f64::consts::E).abs() < 1e-12);
        assert!((r.lower - num::exp(-2.0)).abs() < 1e-15);
        assert!((r.upper - num::exp(2.0)).abs() < 1e-12);
    }

    #[test]
    fn fence_for_constant() {
        let r = fence_check(&parse1("x*0+5"), -3.0, 4.0, 2.0).unwrap();
        assert!(r.holds);
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn fence_refuses_when_lambda_bound_fails() {
        let err = fence_check(&parse1("exp(2*x)"), 0.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Calculus1dError::LambdaBoundFails { .. }));
    }

    #[test]
    fn fence_refuses_nonpositive_f() {
        let err = fence_check(&parse1("x"), -1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Calculus1dError::NotPositive { .. }));
    }

    #[test]
    fn detector_finds_both_roots_of_x_times_x_minus_1() {
        let ivs = root_detector(&parse1("x*(x-1)"), -0.5, 1.5, 100.0, 10_000).unwrap();
        assert_eq!(ivs.len(), 2, "{:?}", ivs);
        assert!(ivs[0].0 <= 0.0 && 0.0 <= ivs[0].1 + 2.0 / 10_000.0);
        assert!(ivs[1].0 - 2.0 / 10_000.0 <= 1.0 && 1.0 <= ivs[1].1 + 2.0 / 10_000.0);
    }

    #[test]
    fn detector_empty_for_exp() {
        let ivs = root_detector(&parse1("exp(x)"), 0.0, 1.0, 2.0, 256).unwrap();
        assert!(ivs.is_empty());
    }

    #[test]
    fn detector_half_width_law_for_identity() {
        // A_f = 1/|x| exactly, so the flagged band has half-width 1/M
        let n = 4096;
        let step = 2.0 / n as f64;
        for m in [10.0, 50.0, 200.0] {
            let ivs = root_detector(&parse1("x"), -1.0, 1.0, m, n).unwrap();
            assert_eq!(ivs.len(), 1);
            let (lo, hi) = ivs[0];
            assert!((lo + 1.0 / m).abs() <= step + 1e-12, "m={} lo={}", m, lo);
            assert!((hi - 1.0 / m).abs() <= step + 1e-12, "m={} hi={}", m, hi);
        }
    }

    #[test]
    fn raising_threshold_nests_intervals() {
        let e = parse1("x*(x-1)");
        let wide = root_detector(&e, -0.5, 1.5, 50.0, 4096).unwrap();
        let narrow = root_detector(&e, -0.5, 1.5, 500.0, 4096).unwrap();
        assert_eq!(wide.len(), narrow.len());
        for (w, n) in wide.iter().zip(narrow.iter()) {
            assert!(w.0 <= n.0 && n.1 <= w.1);
        }
    }

    #[test]
    fn even_order_root_detected_by_neighbors() {
        // f = x^2 has f = f' = 0 at the origin node (indeterminate), but
        // adjacent nodes have A_f = 2/|x| -> the band still appears
        let ivs = root_detector(&parse1("x^2"), -1.0, 1.0, 100.0, 4096).unwrap();
        assert_eq!(ivs.len(), 1);
        assert!(ivs[0].0 < 0.0 && ivs[0].1 > 0.0);
    }
}
