use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pseudo_linalg::{project_out, PVector};
use crate::surface_catalog::{Immersion, InducedMetric, JetPoint};

/// Smallest `|<r,r>|` of a projected basis vector accepted when scanning for normals.
pub const NORMAL_SCAN_MIN: f64 = 1e-3;
/// Smallest `|<r,r>|` tolerated when a previously chosen scan branch is reused.
pub const NORMAL_BRANCH_MIN: f64 = 1e-8;

/// Which ambient basis vectors seeded `e3` and `e4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameBranch {
    pub k3: usize,
    pub k4: usize,
}

/// Orthonormal adapted frame at a point.
///
/// `e1 = a11 x_s`, `e2 = a21 x_s + a22 x_t`. The normal frame is oriented so
/// that `det[e1, e2, e3, e4] > 0` (flat) or `det[e1, e2, e3, e4, x] < 0` (curved).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameData {
    pub e1: PVector,
    pub e2: PVector,
    pub e3: PVector,
    pub e4: PVector,
    /// Normalized position vector for curved ambients.
    pub position: Option<PVector>,
    pub branch: FrameBranch,
    /// True when `e4` was negated relative to the raw scan to fix the orientation.
    pub flipped: bool,
    pub metric: InducedMetric,
    pub a11: f64,
    pub a21: f64,
    pub a22: f64,
}

impl FrameData {
    pub fn vectors(&self) -> [&PVector; 4] {
        [&self.e1, &self.e2, &self.e3, &self.e4]
    }

    /// Largest deviation of `<e_i, e_j>` from `diag(1, 1, -1, -1)`, including
    /// orthogonality to the position vector when present.
    pub fn orthonormality_residual(&self) -> f64 {
        let sig = self.e1.signature();
        let dot = |a: &PVector, b: &PVector| sig.dot(a.coords(), b.coords());
        let want = [1.0, 1.0, -1.0, -1.0];
        let v = self.vectors();
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in i..4 {
                let target = if i == j { want[i] } else { 0.0 };
                worst = worst.max((dot(v[i], v[j]) - target).abs());
            }
            if let Some(x) = &self.position {
                worst = worst.max(dot(v[i], x).abs());
            }
        }
        worst
    }

    /// Frame with `e4` negated.
    pub fn with_e4_flipped(&self) -> FrameData {
        let mut f = self.clone();
        f.e4 = -&f.e4;
        f.flipped = !f.flipped;
        f
    }

    /// Normal frame rotated by `rho`: `e3' = cos e3 + sin e4`, `e4' = -sin e3 + cos e4`.
    pub fn with_normal_rotation(&self, rho: f64) -> FrameData {
        let (s, c) = rho.sin_cos();
        let mut f = self.clone();
        f.e3 = self.e3.scale(c).axpy(s, &self.e4);
        f.e4 = self.e4.scale(c).axpy(-s, &self.e3);
        f
    }
}

/// Frame at `p` using the deterministic basis scan.
pub fn build_frames(imm: &Immersion, p: (f64, f64)) -> Result<FrameData> {
    let jp = imm.evaluate(p.0, p.1)?;
    build_frames_at(&jp, !imm.ambient().is_flat(), p, None)
}

/// Frame from jets; when `branch` is given the scan is skipped and those
/// basis vectors are used, so neighbouring frames stay on one smooth branch.
pub fn build_frames_at(
    jp: &JetPoint,
    curved: bool,
    p: (f64, f64),
    branch: Option<FrameBranch>,
) -> Result<FrameData> {
    let (s, t) = p;
    let sig = jp.signature;
    let metric = InducedMetric::from_jets(jp);
    if !metric.is_positive_definite() {
        return Err(Error::degenerate(
            s,
            t,
            format!(
                "induced metric (E, F, G) = ({:e}, {:e}, {:e}) is not positive definite",
                metric.e, metric.f, metric.g
            ),
        ));
    }
    let (xs, xt) = (jp.d_s(), jp.d_t());
    let a11 = 1.0 / metric.e.sqrt();
    let w = (metric.g - metric.f * metric.f / metric.e).sqrt();
    let a21 = -(metric.f / metric.e) / w;
    let a22 = 1.0 / w;
    let e1 = xs.scale(a11);
    let e2 = xs.scale(a21).axpy(a22, &xt);

    let mut fixed = vec![e1.clone(), e2.clone()];
    let mut signs = vec![1.0, 1.0];
    let position = if curved {
        let x = jp.position();
        let n = x.norm_sq();
        if n == 0.0 {
            return Err(Error::degenerate(s, t, "position vector is light-like"));
        }
        let xh = x.scale(1.0 / n.abs().sqrt());
        fixed.push(xh.clone());
        signs.push(n.signum());
        Some(xh)
    } else {
        None
    };

    let normal = |k: usize, min: f64, fixed: &mut Vec<PVector>, signs: &mut Vec<f64>| {
        let r = project_out(&sig.basis(k), fixed, signs);
        let n = r.norm_sq();
        if n > -min {
            return None;
        }
        let e = r.scale(1.0 / (-n).sqrt());
        fixed.push(e.clone());
        signs.push(-1.0);
        Some(e)
    };

    let dim = sig.dim();
    let (e3, e4, branch) = match branch {
        Some(b) => {
            let lost = || {
                Error::degenerate(
                    s,
                    t,
                    format!("normal frame left its branch (basis {}, {})", b.k3, b.k4),
                )
            };
            let e3 = normal(b.k3, NORMAL_BRANCH_MIN, &mut fixed, &mut signs).ok_or_else(lost)?;
            let e4 = normal(b.k4, NORMAL_BRANCH_MIN, &mut fixed, &mut signs).ok_or_else(lost)?;
            (e3, e4, b)
        }
        None => {
            let mut found = Vec::with_capacity(2);
            for k in 0..dim {
                if let Some(e) = normal(k, NORMAL_SCAN_MIN, &mut fixed, &mut signs) {
                    found.push((k, e));
                    if found.len() == 2 {
                        break;
                    }
                }
            }
            if found.len() < 2 {
                return Err(Error::degenerate(
                    s,
                    t,
                    "no time-like normal directions found by the basis scan",
                ));
            }
            let (k4, e4) = found.pop().unwrap();
            let (k3, e3) = found.pop().unwrap();
            (e3, e4, FrameBranch { k3, k4 })
        }
    };

    let mut cols: Vec<&PVector> = vec![&e1, &e2, &e3, &e4];
    if let Some(x) = &position {
        cols.push(x);
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| cols[j].coords()[i]);
    let det = m.determinant();
    let flipped = if position.is_some() {
        det > 0.0
    } else {
        det < 0.0
    };
    let e4 = if flipped { -&e4 } else { e4 };

    Ok(FrameData {
        e1,
        e2,
        e3,
        e4,
        position,
        branch,
        flipped,
        metric,
        a11,
        a21,
        a22,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr_parser::parse_surface;
    use crate::surface_catalog::{catalog_get, Params};

    fn plane() -> Immersion {
        Immersion::from_definition(
            parse_surface("ambient E(2,2); x1 = 0; x2 = 0; x3 = s; x4 = t").unwrap(),
        )
    }

    #[test]
    fn flat_plane_frame_is_standard_basis() {
        let f = build_frames(&plane(), (0.3, -0.2)).unwrap();
        assert_eq!(f.e1.coords(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.e2.coords(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.e3.coords(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.e4.coords(), &[0.0, 1.0, 0.0, 0.0]);
        assert!(!f.flipped);
    }

    #[test]
    fn catalog_frames_are_orthonormal() {
        for name in crate::surface_catalog::CATALOG_NAMES {
            let imm = catalog_get(name, &Params::new()).unwrap();
            for p in imm.domain().grid(7, 7) {
                let f = build_frames(&imm, p).unwrap();
                assert!(f.orthonormality_residual() <= 1e-10, "{name} at {p:?}");
            }
        }
    }

    #[test]
    fn holomorphic_frame_respects_complex_structure() {
        let imm = catalog_get("holomorphic_graph", &Params::new()).unwrap();
        let f = build_frames(&imm, (1.5, 0.0)).unwrap();
        let j = |v: &PVector| {
            let c = v.coords();
            PVector::new(v.signature(), vec![-c[1], c[0], -c[3], c[2]]).unwrap()
        };
        let je1 = j(&f.e1);
        let d: f64 = je1
            .coords()
            .iter()
            .zip(f.e2.coords())
            .map(|(a, b)| (a - b).abs())
            .sum();
        let d_neg: f64 = je1
            .coords()
            .iter()
            .zip(f.e2.coords())
            .map(|(a, b)| (a + b).abs())
            .sum();
        assert!(d.min(d_neg) <= 1e-12);
    }

    #[test]
    fn reused_branch_reproduces_frame() {
        let imm = catalog_get("phi_h42", &Params::new()).unwrap();
        let f = build_frames(&imm, (0.2, 0.4)).unwrap();
        let jp = imm.evaluate(0.2, 0.4).unwrap();
        let g = build_frames_at(&jp, true, (0.2, 0.4), Some(f.branch)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn light_like_tangent_is_degenerate() {
        let imm = Immersion::from_definition(
            parse_surface("ambient E(2,2); x1 = s; x2 = 0; x3 = s; x4 = t").unwrap(),
        );
        assert!(matches!(
            build_frames(&imm, (0.0, 0.0)),
            Err(Error::Degenerate { .. })
        ));
    }
}
