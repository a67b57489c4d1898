//! Discrete higher-order normals of polygonal curves in R^{N+1}.
//!
//! A polygonal's j-th normal is a polygon in real projective space RP^N
//! built from the segment directions; its length is the discrete analogue of
//! `∫ ‖ṅ_j‖ ds`. The crate computes these normals, estimates the relaxed
//! functional of smooth curves by inscribed refinement, and checks the
//! related integral-geometric, Taylor-expansion and curvature-measure
//! statements numerically.

// `!(x > y)` is used deliberately so NaN inputs take the rejection branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg_geo;
pub mod polyline;
pub mod smooth_curve;
pub mod discrete_frame;
pub mod taylor_verify;
pub mod relaxation;
pub mod intgeo;
pub mod curvature_measure;
pub mod cli;

pub use error::{Error, Result};
