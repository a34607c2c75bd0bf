//! Numerical toolkit for the sine-Gordon model in its equal-time and
//! equal-space Hamiltonian descriptions, with integrable (frozen Bäcklund)
//! defects.

// `!(x > 0.0)` guards are deliberate: they also reject NaN. Index loops
// mirror the recursions they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod charges;
pub mod defect;
pub mod error;
pub mod fields;
pub mod jet;
pub mod lax;
pub mod matcore;
pub mod rmatrix;
pub mod transition;

pub use error::{Error, Result};
pub use fields::{FieldEvaluator, FieldSample, GridWindow, ModelParams, Picture};
pub use lax::SpectralPoint;
pub use matcore::{Mat2, Mat4, C64};
