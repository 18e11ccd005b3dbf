//! Numerical estimation of the (n-1)-dimensional measure of zero level sets.
//!
//! The central quantity is the singular integral
//!
//! ```text
//! F(k) = (1/k) * integral over B(0,2R) of (|grad f| / |f|)^((k-1)/k) dx
//! ```
//!
//! whose limit as `k -> infinity` is twice the H^(n-1) measure of the zero
//! set of `f`, for regular zero sets of C^{1,1} fields and for unsigned
//! distance fields to embedded curves in the plane. This crate provides:
//!
//! * [`expr`] — a small expression language with forward-mode gradient
//!   evaluation (dual numbers),
//! * [`fields`] — a uniform scalar-field abstraction (analytic, distance
//!   to a sampled curve, level-shifted),
//! * [`geometry`] — curve containers and independent geometric oracles
//!   (polyline length, tube volume, reach, arc length, contour tracing),
//! * [`estimator`] — the adaptive quadrature evaluating `F(k)`, the
//!   `k -> infinity` extrapolation, and derivative-sandwich diagnostics,
//! * [`calculus1d`] — the 1-d ratio bound checks and the root-detecting
//!   ratio `|f'/f|`,
//! * [`pathology`] — a greedy disjoint circle packing at rational centers
//!   whose limit set defeats the distance-field measure.
//!
//! The crate is `no_std` compatible (with `alloc`); all floating-point
//! transcendentals go through `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod calculus1d;
pub mod estimator;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod num;
pub mod pathology;

pub use expr::Expression;
pub use fields::ScalarFieldHandle;
pub use geometry::SampledCurve;
