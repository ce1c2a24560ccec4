use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pseudo_linalg::{PVector, Sym2};
use crate::surface_catalog::Immersion;

use super::canonical::{adapted_normal_angle, rotate_normal};
use super::frames::{build_frames_at, FrameBranch, FrameData};
use super::second_form::{invariants, second_fundamental_form, shape_operators};

/// Choice of normal frame along a stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// The oriented basis-scan frame.
    Scan,
    /// Normal frame rotated pointwise into the equality normal form, using
    /// the orientation that attains the minimum defect.
    Adapted,
}

/// Connection forms evaluated on `e1` and `e2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSample {
    pub omega12: [f64; 2],
    pub omega34: [f64; 2],
}

#[derive(Debug, Clone)]
struct LocalFrame {
    frames: FrameData,
    a3: Sym2,
    a4: Sym2,
}

/// Frame field in a neighbourhood of a base point, kept on one branch.
struct FrameField<'a> {
    imm: &'a Immersion,
    curved: bool,
    branch: FrameBranch,
    gauge: Gauge,
    flip: bool,
    rho0: f64,
}

impl<'a> FrameField<'a> {
    fn new(imm: &'a Immersion, p: (f64, f64), gauge: Gauge) -> Result<(Self, LocalFrame)> {
        let curved = !imm.ambient().is_flat();
        let jp = imm.evaluate(p.0, p.1)?;
        let frames = build_frames_at(&jp, curved, p, None)?;
        let mut field = FrameField {
            imm,
            curved,
            branch: frames.branch,
            gauge,
            flip: false,
            rho0: 0.0,
        };
        if gauge == Gauge::Adapted {
            let h = second_fundamental_form(&jp, &frames);
            let (a3, a4) = shape_operators(&h, &frames);
            field.flip = invariants(&a3, &a4, imm.ambient().curvature()).equality_sign < 0.0;
            let a4 = if field.flip { a4.scale(-1.0) } else { a4 };
            field.rho0 = adapted_normal_angle(&a3, &a4, None);
        }
        let center = field.at(p)?;
        Ok((field, center))
    }

    fn at(&self, p: (f64, f64)) -> Result<LocalFrame> {
        let jp = self.imm.evaluate(p.0, p.1)?;
        let mut frames = build_frames_at(&jp, self.curved, p, Some(self.branch))?;
        let h = second_fundamental_form(&jp, &frames);
        let (mut a3, mut a4) = shape_operators(&h, &frames);
        if self.gauge == Gauge::Adapted {
            if self.flip {
                frames = frames.with_e4_flipped();
                a4 = a4.scale(-1.0);
            }
            let rho = adapted_normal_angle(&a3, &a4, Some(self.rho0));
            frames = frames.with_normal_rotation(rho);
            (a3, a4) = rotate_normal(&a3, &a4, rho);
        }
        Ok(LocalFrame { frames, a3, a4 })
    }
}

fn dot(a: &PVector, b: &PVector) -> f64 {
    a.signature().dot(a.coords(), b.coords())
}

/// Parameter steps giving surface displacement `step` along each coordinate line.
fn parameter_steps(center: &LocalFrame, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0) {
        return Err(Error::Input(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let m = center.frames.metric;
    Ok((step / m.e.sqrt(), step / m.g.sqrt()))
}

/// Central-difference weights `(offset, weight)` for a first derivative.
const SECOND_ORDER: [(f64, f64); 2] = [(1.0, 0.5), (-1.0, -0.5)];
const FOURTH_ORDER: [(f64, f64); 4] = [
    (2.0, -1.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (-2.0, 1.0 / 12.0),
];

/// `omega12` and `omega34` on `d/ds` and `d/dt` at `p` by central differences.
fn coordinate_forms(
    field: &FrameField,
    center: &LocalFrame,
    p: (f64, f64),
    (hs, ht): (f64, f64),
    stencil: &[(f64, f64)],
) -> Result<([f64; 2], [f64; 2])> {
    let mut w12 = [0.0; 2];
    let mut w34 = [0.0; 2];
    for (k, (ds, dt, h)) in [(hs, 0.0, hs), (0.0, ht, ht)].into_iter().enumerate() {
        let sig = center.frames.e1.signature();
        let mut de1 = PVector::zeros(sig);
        let mut de3 = PVector::zeros(sig);
        for &(o, w) in stencil {
            let l = field.at((p.0 + o * ds, p.1 + o * dt))?;
            de1 = de1.axpy(w / h, &l.frames.e1);
            de3 = de3.axpy(w / h, &l.frames.e3);
        }
        w12[k] = dot(&de1, &center.frames.e2);
        w34[k] = -dot(&de3, &center.frames.e4);
    }
    Ok((w12, w34))
}

fn on_frame(f: &FrameData, w: [f64; 2]) -> [f64; 2] {
    [f.a11 * w[0], f.a21 * w[0] + f.a22 * w[1]]
}

/// `omega12(e_i) = <nabla_{e_i} e1, e2>` and `omega34(e_i) = -<D_{e_i} e3, e4>`,
/// so that `D_X e3 = omega34(X) e4` modulo tangent terms.
pub fn connection_forms(
    imm: &Immersion,
    p: (f64, f64),
    step: f64,
    gauge: Gauge,
) -> Result<ConnectionSample> {
    let (field, center) = FrameField::new(imm, p, gauge)?;
    let steps = parameter_steps(&center, step)?;
    let (w12, w34) = coordinate_forms(&field, &center, p, steps, &SECOND_ORDER)?;
    Ok(ConnectionSample {
        omega12: on_frame(&center.frames, w12),
        omega34: on_frame(&center.frames, w34),
    })
}

/// Curvatures recovered from the structure equations
/// `d omega12 = -K dA` and `d omega34 = -K^D dA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureCheck {
    pub k_from_omega: f64,
    pub kd_from_omega: f64,
}

pub fn structure_equation_check(
    imm: &Immersion,
    p: (f64, f64),
    step: f64,
) -> Result<StructureCheck> {
    let (field, center) = FrameField::new(imm, p, Gauge::Scan)?;
    let (hs, ht) = parameter_steps(&center, step)?;
    let forms_at = |q: (f64, f64)| {
        let c = field.at(q)?;
        coordinate_forms(&field, &c, q, (hs, ht), &SECOND_ORDER)
    };
    let (w12_sp, w34_sp) = forms_at((p.0 + hs, p.1))?;
    let (w12_sm, w34_sm) = forms_at((p.0 - hs, p.1))?;
    let (w12_tp, w34_tp) = forms_at((p.0, p.1 + ht))?;
    let (w12_tm, w34_tm) = forms_at((p.0, p.1 - ht))?;
    // d(w_s ds + w_t dt) = (d_s w_t - d_t w_s) ds ^ dt
    let curl = |sp: [f64; 2], sm: [f64; 2], tp: [f64; 2], tm: [f64; 2]| {
        (sp[1] - sm[1]) / (2.0 * hs) - (tp[0] - tm[0]) / (2.0 * ht)
    };
    let area = center.frames.metric.area_density();
    Ok(StructureCheck {
        k_from_omega: -curl(w12_sp, w12_sm, w12_tp, w12_tm) / area,
        kd_from_omega: -curl(w34_sp, w34_sm, w34_tp, w34_tm) / area,
    })
}

/// Codazzi residual of the unmodified second fundamental form.
pub fn codazzi_residual(imm: &Immersion, p: (f64, f64), step: f64) -> Result<f64> {
    codazzi_residual_with(imm, p, step, |_, _| {})
}

/// Largest normal length of `(nabla_{e1} h)(e2, e_j) - (nabla_{e2} h)(e1, e_j)`,
/// `j = 1, 2`, from fourth-order central differences. `tamper` may modify
/// `(A3, A4)` at every stencil node before use, to exercise the check
/// against corrupted data.
pub fn codazzi_residual_with(
    imm: &Immersion,
    p: (f64, f64),
    step: f64,
    tamper: impl Fn(&mut Sym2, &mut Sym2),
) -> Result<f64> {
    let (field, center) = FrameField::new(imm, p, Gauge::Scan)?;
    let (hs, ht) = parameter_steps(&center, step)?;
    // eta[r][i][j] = <h_ij, e_r> * <e_r, e_r> = -(A_r)_ij
    let eta_at = |q: (f64, f64)| -> Result<[Sym2; 2]> {
        let mut l = if q == p { center.clone() } else { field.at(q)? };
        tamper(&mut l.a3, &mut l.a4);
        Ok([l.a3.scale(-1.0), l.a4.scale(-1.0)])
    };
    let eta = eta_at(p)?;
    // First derivatives of eta along s and t.
    let mut d_s = [Sym2::ZERO; 2];
    let mut d_t = [Sym2::ZERO; 2];
    for &(o, w) in &FOURTH_ORDER {
        let es = eta_at((p.0 + o * hs, p.1))?;
        let et = eta_at((p.0, p.1 + o * ht))?;
        for r in 0..2 {
            d_s[r] = d_s[r].lin(1.0, &es[r], w / hs);
            d_t[r] = d_t[r].lin(1.0, &et[r], w / ht);
        }
    }
    let (w12, w34) = coordinate_forms(&field, &center, p, (hs, ht), &FOURTH_ORDER)?;
    let f = &center.frames;
    let w12 = on_frame(f, w12);
    let w34 = on_frame(f, w34);

    // Derivative of eta[r]_ij along e_x.
    let deta = |x: usize, r: usize, i: usize, j: usize| {
        let (ds, dt) = (d_s[r].get(i, j), d_t[r].get(i, j));
        if x == 0 {
            f.a11 * ds
        } else {
            f.a21 * ds + f.a22 * dt
        }
    };
    // nabla_{e_x} e_i in the tangent frame.
    let nabla = |x: usize, i: usize| -> [f64; 2] {
        let w = w12[x];
        if i == 0 {
            [0.0, w]
        } else {
            [-w, 0.0]
        }
    };
    let eta_vec =
        |r: usize, v: [f64; 2], j: usize| v[0] * eta[r].get(0, j) + v[1] * eta[r].get(1, j);
    // (nabla-bar_{e_x} h)(e_y, e_z) in components along (e3, e4).
    let cov = |x: usize, y: usize, z: usize| -> [f64; 2] {
        let mut out = [0.0; 2];
        for (r, o) in out.iter_mut().enumerate() {
            let normal = if r == 0 {
                -w34[x] * eta[1].get(y, z)
            } else {
                w34[x] * eta[0].get(y, z)
            };
            *o =
                deta(x, r, y, z) + normal - eta_vec(r, nabla(x, y), z) - eta_vec(r, nabla(x, z), y);
        }
        out
    };
    let mut worst: f64 = 0.0;
    for j in 0..2 {
        let a = cov(0, 1, j);
        let b = cov(1, 0, j);
        worst = worst.max((a[0] - b[0]).hypot(a[1] - b[1]));
    }
    Ok(worst)
}
