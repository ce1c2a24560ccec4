use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::pseudo_linalg::{eigen_sym2, Sym2};

/// Samples of the normal angle scanned before polishing.
pub const RHO_SAMPLES: usize = 720;
const POLISH_ITERS: usize = 100;
/// Relative size of `tr A` below which the mean curvature counts as zero.
const MINIMAL_TRACE_TOL: f64 = 1e-9;

/// Parameters of the normal form `A3 = diag(alpha, mu)`,
/// `A4 = [[delta, gamma], [gamma, -delta]]` and the rotations reaching it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFrame {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu: f64,
    /// Tangent rotation angle.
    pub theta: f64,
    /// Normal rotation angle, applied before the optional `e4` flip.
    pub rho: f64,
    /// Whether `e4` is negated in the canonical frame.
    pub flipped: bool,
    /// Frobenius distance to the nearest pair `(diag(2g + m, m), offdiag(g))`.
    pub residual: f64,
}

/// Rotate the normal frame by `rho`.
pub fn rotate_normal(a3: &Sym2, a4: &Sym2, rho: f64) -> (Sym2, Sym2) {
    let (s, c) = rho.sin_cos();
    (a3.lin(c, a4, s), a3.lin(-s, a4, c))
}

/// Distance from `(a3, a4)` to the nearest pair `(diag(2g + m, m), offdiag(g))`,
/// with the minimizing `(g, m)`.
pub fn equality_form_residual(a3: &Sym2, a4: &Sym2) -> (f64, f64, f64) {
    // Least squares in (g, m) over the entries that depend on them.
    let g = (a3.a11 - a3.a22) / 4.0 + a4.a12 / 2.0;
    let m = (a3.a11 + a3.a22) / 2.0 - g;
    let r = |x: f64| x * x;
    let sq = r(a3.a11 - 2.0 * g - m)
        + r(a3.a22 - m)
        + 2.0 * r(a3.a12)
        + r(a4.a11)
        + r(a4.a22)
        + 2.0 * r(a4.a12 - g);
    (sq.max(0.0).sqrt(), g, m)
}

fn diagonalized(a3: &Sym2, a4: &Sym2, rho: f64, flipped: bool) -> CanonicalFrame {
    let (n3, mut n4) = rotate_normal(a3, a4, rho);
    if flipped {
        n4 = n4.scale(-1.0);
    }
    let ((alpha, mu), theta) = eigen_sym2(&n3);
    let b3 = n3.rotated(theta);
    let b4 = n4.rotated(theta);
    let (residual, _, _) = equality_form_residual(&b3, &b4);
    CanonicalFrame {
        alpha,
        gamma: b4.a12,
        delta: 0.5 * (b4.a11 - b4.a22),
        mu,
        theta,
        rho,
        flipped,
        residual,
    }
}

/// Minimize a smooth periodic function: coarse scan, then ternary search.
pub fn minimize_periodic(f: impl Fn(f64) -> f64, period: f64, samples: usize) -> f64 {
    let step = period / samples as f64;
    let (mut best, mut best_val) = (0.0, f64::INFINITY);
    for i in 0..samples {
        let x = i as f64 * step;
        let v = f(x);
        if v < best_val {
            best = x;
            best_val = v;
        }
    }
    let (mut lo, mut hi) = (best - step, best + step);
    for _ in 0..POLISH_ITERS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let x = 0.5 * (lo + hi);
    let x = if f(x) <= best_val { x } else { best };
    x.rem_euclid(period)
}

/// Rotations bringing `(A3, A4)` to the normal form used by the equality case.
///
/// With nonzero mean curvature `e3` is aligned so that `tr A3 >= 0`, `tr A4 = 0`;
/// for minimal points the normal angle minimizes the residual. Both normal
/// orientations are tried and the smaller residual wins, ties going to the
/// unflipped one.
pub fn canonical_equality_frame(a3: &Sym2, a4: &Sym2) -> CanonicalFrame {
    let (t3, t4) = (a3.trace(), a4.trace());
    let scale = a3
        .frobenius_sq()
        .sqrt()
        .max(a4.frobenius_sq().sqrt())
        .max(1.0);
    let minimal = t3.hypot(t4) <= MINIMAL_TRACE_TOL * scale;
    let solve = |flipped: bool| {
        if minimal {
            let rho = minimize_periodic(
                |r| diagonalized(a3, a4, r, flipped).residual,
                TAU,
                RHO_SAMPLES,
            );
            diagonalized(a3, a4, rho, flipped)
        } else {
            let rho = t4.atan2(t3).rem_euclid(TAU);
            diagonalized(a3, a4, rho, flipped)
        }
    };
    let plain = solve(false);
    let flipped = solve(true);
    if flipped.residual < plain.residual {
        flipped
    } else {
        plain
    }
}

/// Normal angle making the pair closest to the equality form in a fixed
/// tangent frame, taken modulo `pi` nearest to `near` when given.
pub fn adapted_normal_angle(a3: &Sym2, a4: &Sym2, near: Option<f64>) -> f64 {
    let f = |r: f64| {
        let (n3, n4) = rotate_normal(a3, a4, r);
        equality_form_residual(&n3, &n4).0
    };
    let rho = minimize_periodic(f, TAU, RHO_SAMPLES);
    match near {
        Some(c) => rho + PI * ((c - rho) / PI).round(),
        None => rho,
    }
}
