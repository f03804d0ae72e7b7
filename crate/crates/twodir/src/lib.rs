//! Two-direction multiscaling functions and multiwavelets.
//!
//! A two-direction multiscaling function is a vector function `phi` that is a
//! linear combination of scaled shifts of itself *and of its reflection*:
//!
//! ```text
//! phi(x) = sqrt(d) * sum_k [ P_k^+ phi(d x - k) + P_k^- phi(k - d x) ]
//! ```
//!
//! with `r x r` matrix coefficients `P_k^+`, `P_k^-`, dilation `d`, and
//! multiplicity `r`. The associated multiwavelets `psi^(s)` are built from a
//! second coefficient family `Q_k^(s)+`, `Q_k^(s)-`.
//!
//! This crate computes, from the recursion coefficients alone:
//!
//! - discrete and continuous moments with the standard normalization
//!   `m_0^T m_0 = 1/2` ([`moments`]),
//! - exact point values of `phi`, `psi^(s)`, and their derivatives on dyadic
//!   grids, via the transfer-matrix eigenvalue approach ([`pointvals`],
//!   [`derivs`]),
//! - approximate point values via the cascade iteration, used as an
//!   independent cross-check ([`cascade`]),
//! - Condition E and mask validation ([`mask`]).
//!
//! Mask files are JSON; coefficient entries may be plain numbers or exact
//! arithmetic expressions such as `"(93-13*sqrt(31))/(320*sqrt(2))"`
//! ([`expr`]). Two built-in example masks are provided ([`fixtures`]).
//!
//! # Example
//!
//! ```
//! use twodir::{fixtures, mask, pointvals};
//!
//! let sys = fixtures::system_5_2();
//! assert!(mask::condition_e(&sys).satisfied);
//!
//! // exact values at the integers, normalized by the zeroth moment
//! let (phi, report) = pointvals::integer_values(&sys).unwrap();
//! assert!((phi.value(1)[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
//! assert!((report.normalizing_constant + 1.224744871391589).abs() < 1e-9);
//!
//! // one dyadic subdivision step: values at the half-integers
//! let finer = pointvals::refine(&sys, &phi).unwrap();
//! assert_eq!(finer.len(), 5);
//! ```

pub mod cascade;
pub mod cli;
pub mod derivs;
pub mod expr;
pub mod fixtures;
pub mod linalg;
pub mod mask;
pub mod moments;
pub mod pointvals;

/// Dense real matrix used throughout.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector used throughout.
pub type Vector = nalgebra::DVector<f64>;
/// Complex scalar for eigenvalue lists.
pub type Complex = nalgebra::Complex<f64>;
