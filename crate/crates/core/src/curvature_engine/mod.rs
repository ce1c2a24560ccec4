//! Pointwise extrinsic geometry of space-like surfaces: adapted frames,
//! second fundamental form, shape operators, curvature invariants, the
//! equality normal form, the ellipse of curvature, connection forms and
//! the Codazzi residual.

mod canonical;
mod connection;
mod ellipse;
mod frames;
mod second_form;

pub use canonical::{
    adapted_normal_angle, canonical_equality_frame, equality_form_residual, minimize_periodic,
    rotate_normal, CanonicalFrame, RHO_SAMPLES,
};
pub use connection::{
    codazzi_residual, codazzi_residual_with, connection_forms, structure_equation_check,
    ConnectionSample, Gauge, StructureCheck,
};
pub use ellipse::{ellipse_axes_by_sweep, ellipse_of_curvature, Ellipse, ELLIPSE_TOL};
pub use frames::{
    build_frames, build_frames_at, FrameBranch, FrameData, NORMAL_BRANCH_MIN, NORMAL_SCAN_MIN,
};
pub use second_form::{
    invariants, second_fundamental_form, shape_consistency, shape_operators,
    wintgen_defect_formula, DefectFormula, Invariants, SecondFF,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pseudo_linalg::{inner, LinalgError, PVector, Sym2};
use crate::surface_catalog::{Immersion, InducedMetric};

/// Everything computed at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub s: f64,
    pub t: f64,
    pub metric: InducedMetric,
    pub a3: Sym2,
    pub a4: Sym2,
    pub h: SecondFF,
    pub mean_curvature: PVector,
    pub h2: f64,
    pub k: f64,
    pub kd: f64,
    pub defect: f64,
    pub equality_sign: f64,
    pub canonical: CanonicalFrame,
    pub ellipse: Ellipse,
    /// Violation of `<h(e_i,e_j), e_r> = <A_r e_i, e_j>`.
    pub shape_residual: f64,
    /// Deviation of the frame from orthonormality.
    pub frame_residual: f64,
    /// Whether `e4` was negated to orient the frame.
    pub orientation_flipped: bool,
}

impl CurvatureReport {
    /// Coordinate norm of the mean curvature vector.
    pub fn mean_curvature_norm(&self) -> f64 {
        self.mean_curvature.coord_norm()
    }
}

/// Full pointwise analysis at `p`.
pub fn analyze_point(imm: &Immersion, p: (f64, f64)) -> Result<CurvatureReport> {
    let jp = imm.evaluate(p.0, p.1)?;
    let frames = build_frames_at(&jp, !imm.ambient().is_flat(), p, None)?;
    let h = second_fundamental_form(&jp, &frames);
    let (a3, a4) = shape_operators(&h, &frames);
    let inv = invariants(&a3, &a4, imm.ambient().curvature());
    let mean = h.mean_curvature();
    let ellipse = ellipse_of_curvature(&h, &mean);
    Ok(CurvatureReport {
        s: p.0,
        t: p.1,
        metric: frames.metric,
        shape_residual: shape_consistency(&h, &a3, &a4, &frames),
        frame_residual: frames.orthonormality_residual(),
        orientation_flipped: frames.flipped,
        canonical: canonical_equality_frame(&a3, &a4),
        a3,
        a4,
        h,
        mean_curvature: mean,
        h2: inv.h2,
        k: inv.k,
        kd: inv.kd,
        defect: inv.defect,
        equality_sign: inv.equality_sign,
        ellipse,
    })
}

/// Curvature tensor of a space form of curvature `c`: `R(X, Y) Z = c (<X,Z> Y - <Y,Z> X)`.
pub fn ambient_curvature(
    x: &PVector,
    y: &PVector,
    z: &PVector,
    c: f64,
) -> std::result::Result<PVector, LinalgError> {
    let xz = inner(x, z)?;
    let yz = inner(y, z)?;
    Ok(y.scale(c * xz).axpy(-c * yz, x))
}
