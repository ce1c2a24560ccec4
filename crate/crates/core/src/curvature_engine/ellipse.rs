use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::pseudo_linalg::{eigen_sym2, PVector, Sym2};

use super::second_form::SecondFF;

/// Relative tolerance of the circle and point tests.
pub const ELLIPSE_TOL: f64 = 1e-8;

/// Image of the unit tangent circle under `h`: `H + cos(2t) u + sin(2t) v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: PVector,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub is_circle: bool,
    pub is_point: bool,
}

/// Squared length `-<w, w>` in the negative definite normal plane.
fn normal_len_sq(w: &PVector) -> f64 {
    -w.norm_sq()
}

pub fn ellipse_of_curvature(h: &SecondFF, mean: &PVector) -> Ellipse {
    let u = (&h.h11 - &h.h22).scale(0.5);
    let v = &h.h12;
    let sig = u.signature();
    let uu = -sig.dot(u.coords(), u.coords());
    let vv = -sig.dot(v.coords(), v.coords());
    let uv = -sig.dot(u.coords(), v.coords());
    let ((l1, l2), _) = eigen_sym2(&Sym2::new(uu, uv, vv));
    let tol = ELLIPSE_TOL * (uu.abs() + vv.abs()).max(1.0);
    let is_point = uu.abs() <= tol && vv.abs() <= tol;
    let is_circle = (uu - vv).abs() <= tol && uv.abs() <= tol;
    Ellipse {
        center: mean.clone(),
        semi_major: l1.max(0.0).sqrt(),
        semi_minor: l2.max(0.0).sqrt(),
        is_circle,
        is_point,
    }
}

/// Semi-axes by sampling `|h(v,v) - H|` over unit tangent vectors
/// `v = cos(t) e1 + sin(t) e2`, `t` in `[0, pi)`, then refining the extreme
/// samples by golden-section search.
pub fn ellipse_axes_by_sweep(h: &SecondFF, mean: &PVector, samples: usize) -> (f64, f64) {
    let radius = |t: f64| {
        let (s, c) = t.sin_cos();
        let w = h
            .h11
            .scale(c * c)
            .axpy(2.0 * s * c, &h.h12)
            .axpy(s * s, &h.h22);
        normal_len_sq(&(&w - mean)).max(0.0).sqrt()
    };
    let step = PI / samples as f64;
    let ts: Vec<f64> = (0..samples).map(|i| i as f64 * step).collect();
    let rs: Vec<f64> = ts.iter().map(|&t| radius(t)).collect();
    let arg = |better: fn(f64, f64) -> bool| {
        let mut k = 0;
        for i in 1..samples {
            if better(rs[i], rs[k]) {
                k = i;
            }
        }
        ts[k]
    };
    let t_max = arg(|a, b| a > b);
    let t_min = arg(|a, b| a < b);
    let a = golden(|t| -radius(t), t_max - step, t_max + step);
    let b = golden(radius, t_min - step, t_min + step);
    (-a, b)
}

/// Minimum value of `f` on `[lo, hi]` by golden-section search.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature_engine::frames::build_frames;
    use crate::surface_catalog::{catalog_get, Params};

    fn frames_at(name: &str) -> crate::curvature_engine::frames::FrameData {
        let imm = catalog_get(name, &Params::new()).unwrap();
        let p = imm.domain();
        build_frames(&imm, (0.5 * (p.s0 + p.s1), 0.5 * (p.t0 + p.t1))).unwrap()
    }

    #[test]
    fn equality_data_is_unit_circle() {
        let f = frames_at("flat_L");
        let h = SecondFF {
            h11: f.e3.scale(-1.0),
            h12: f.e4.scale(-1.0),
            h22: f.e3.clone(),
        };
        let e = ellipse_of_curvature(&h, &h.mean_curvature());
        assert!(e.is_circle && !e.is_point);
        assert!((e.semi_major - 1.0).abs() < 1e-12 && (e.semi_minor - 1.0).abs() < 1e-12);
        assert!(e.center.coord_norm() < 1e-15);
    }

    #[test]
    fn umbilical_data_is_a_point() {
        let f = frames_at("umbilical_flat");
        let h = SecondFF {
            h11: f.e3.scale(0.7),
            h12: f.e3.scale(0.0),
            h22: f.e3.scale(0.7),
        };
        let e = ellipse_of_curvature(&h, &h.mean_curvature());
        assert!(e.is_point && e.semi_major < 1e-12);
    }

    #[test]
    fn generic_data_matches_sweep() {
        let f = frames_at("random_polynomial");
        let h = SecondFF {
            h11: f.e3.scale(0.9).axpy(0.2, &f.e4),
            h12: f.e3.scale(-0.3).axpy(0.5, &f.e4),
            h22: f.e3.scale(0.1).axpy(-0.4, &f.e4),
        };
        let m = h.mean_curvature();
        let e = ellipse_of_curvature(&h, &m);
        assert!(!e.is_circle && e.semi_major > e.semi_minor);
        let (a, b) = ellipse_axes_by_sweep(&h, &m, 360);
        assert!((a - e.semi_major).abs() <= 1e-6, "{a} vs {}", e.semi_major);
        assert!((b - e.semi_minor).abs() <= 1e-6, "{b} vs {}", e.semi_minor);
    }
}
