use serde::{Deserialize, Serialize};

use crate::pseudo_linalg::{commutator_21, PVector, Sym2};
use crate::surface_catalog::JetPoint;

use super::frames::FrameData;

/// `h(e_i, e_j)` as ambient vectors in the normal plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFF {
    pub h11: PVector,
    pub h12: PVector,
    pub h22: PVector,
}

impl SecondFF {
    /// Rebuild `h` from shape operators: `h_ij = -(A3)_ij e3 - (A4)_ij e4`.
    pub fn from_shape_operators(a3: &Sym2, a4: &Sym2, frames: &FrameData) -> SecondFF {
        let h = |i, j| {
            frames
                .e3
                .scale(-a3.get(i, j))
                .axpy(-a4.get(i, j), &frames.e4)
        };
        SecondFF {
            h11: h(0, 0),
            h12: h(0, 1),
            h22: h(1, 1),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &PVector {
        match (i, j) {
            (0, 0) => &self.h11,
            (1, 1) => &self.h22,
            _ => &self.h12,
        }
    }

    /// `H = (h11 + h22) / 2`.
    pub fn mean_curvature(&self) -> PVector {
        (&self.h11 + &self.h22).scale(0.5)
    }

    /// Largest coordinate norm among the three components.
    pub fn max_coord_norm(&self) -> f64 {
        [&self.h11, &self.h12, &self.h22]
            .iter()
            .map(|h| h.coord_norm())
            .fold(0.0, f64::max)
    }
}

fn normal_part(w: &PVector, frames: &FrameData) -> PVector {
    let sig = w.signature();
    let c3 = sig.dot(w.coords(), frames.e3.coords());
    let c4 = sig.dot(w.coords(), frames.e4.coords());
    frames.e3.scale(-c3).axpy(-c4, &frames.e4)
}

/// Normal projection of the second derivatives of the immersion in the frame basis.
pub fn second_fundamental_form(jp: &JetPoint, frames: &FrameData) -> SecondFF {
    let (xss, xst, xtt) = (jp.d_ss(), jp.d_st(), jp.d_tt());
    let (a11, a21, a22) = (frames.a11, frames.a21, frames.a22);
    let d11 = xss.scale(a11 * a11);
    let d12 = xss.scale(a11 * a21).axpy(a11 * a22, &xst);
    let d22 = xss
        .scale(a21 * a21)
        .axpy(2.0 * a21 * a22, &xst)
        .axpy(a22 * a22, &xtt);
    SecondFF {
        h11: normal_part(&d11, frames),
        h12: normal_part(&d12, frames),
        h22: normal_part(&d22, frames),
    }
}

/// `(A_r)_ij = <h(e_i, e_j), e_r>` for `r = 3, 4`.
pub fn shape_operators(h: &SecondFF, frames: &FrameData) -> (Sym2, Sym2) {
    let sig = frames.e1.signature();
    let a = |e: &PVector| {
        let d = |v: &PVector| sig.dot(v.coords(), e.coords());
        Sym2::new(d(&h.h11), d(&h.h12), d(&h.h22))
    };
    (a(&frames.e3), a(&frames.e4))
}

/// Largest violation of `<h(e_i,e_j), e_r> = <A_r e_i, e_j>`, with `A_r e_i`
/// assembled as a tangent vector, together with the error in reconstructing
/// `h` from the shape operators.
pub fn shape_consistency(h: &SecondFF, a3: &Sym2, a4: &Sym2, frames: &FrameData) -> f64 {
    let sig = frames.e1.signature();
    let dot = |u: &PVector, v: &PVector| sig.dot(u.coords(), v.coords());
    let tangent = [&frames.e1, &frames.e2];
    let mut worst: f64 = 0.0;
    for (a, er) in [(a3, &frames.e3), (a4, &frames.e4)] {
        for i in 0..2 {
            let ae_i = tangent[0].scale(a.get(i, 0)).axpy(a.get(i, 1), tangent[1]);
            for (j, ej) in tangent.iter().enumerate() {
                worst = worst.max((dot(h.get(i, j), er) - dot(&ae_i, ej)).abs());
            }
        }
    }
    let rebuilt = SecondFF::from_shape_operators(a3, a4, frames);
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        worst = worst.max((h.get(i, j) - rebuilt.get(i, j)).coord_norm());
    }
    worst
}

/// Pointwise curvature invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub k: f64,
    pub kd: f64,
    pub h2: f64,
    pub defect: f64,
    /// Sign `s` of `K^D` attaining the minimum of `K + s K^D - <H,H> - c`.
    pub equality_sign: f64,
}

/// Gauss curvature, normal curvature, `<H,H>` and Wintgen defect from `(A3, A4)`.
pub fn invariants(a3: &Sym2, a4: &Sym2, c: f64) -> Invariants {
    // With <e3,e3> = <e4,e4> = -1 the Gauss equation K = c + <h11,h22> - <h12,h12>
    // becomes c - det A3 - det A4.
    let k = c - a3.det() - a4.det();
    let kd = commutator_21(a3, a4);
    let (t3, t4) = (a3.trace(), a4.trace());
    let h2 = -(t3 * t3 + t4 * t4) / 4.0;
    let plus = k + kd - h2 - c;
    let minus = k - kd - h2 - c;
    let (defect, equality_sign) = if plus <= minus {
        (plus, 1.0)
    } else {
        (minus, -1.0)
    };
    Invariants {
        k,
        kd,
        h2,
        defect,
        equality_sign,
    }
}

/// Invariants of the pair `A3 = diag(alpha, mu)`, `A4 = [[delta, gamma], [gamma, -delta]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectFormula {
    pub k: f64,
    pub kd: f64,
    pub h2: f64,
    pub defect: f64,
}

pub fn wintgen_defect_formula(
    alpha: f64,
    gamma: f64,
    delta: f64,
    mu: f64,
    c: f64,
) -> DefectFormula {
    let k = -alpha * mu + gamma * gamma + delta * delta + c;
    let kd = gamma * (mu - alpha);
    let h2 = -(alpha + mu) * (alpha + mu) / 4.0;
    let q = 2.0 * gamma - alpha + mu;
    let defect = delta * delta + 0.25 * q * q;
    debug_assert!(
        (k + kd - h2 - c - defect).abs() <= 1e-12 * (1.0 + k.abs() + kd.abs() + h2.abs() + c.abs()),
        "closed-form defect disagrees with K + KD - H2 - c"
    );
    DefectFormula { k, kd, h2, defect }
}
