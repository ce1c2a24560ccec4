//! Scalar curvature fields sampled on parameter grids, their intrinsic
//! Laplacian, and the log-harmonicity checks of minimal equality surfaces.

mod grid;
mod laplacian;

pub use grid::{
    field_from_fn, field_from_reports, sample_field, sample_reports, GridField, GridSpec, Quantity,
    LOG_FLOOR,
};
pub use laplacian::{
    harmonicity_verdict, intrinsic_laplacian, refinement_study, second_order_convergence,
    verify_identity, Identity, LaplacianReport, RefinementStudy, Verdict, EQUALITY_TOL,
    MINIMAL_H2_TOL, MINIMAL_H_TOL, ROUNDOFF_FLOOR, SECOND_ORDER_RATIO, VERDICT_TOL,
};
