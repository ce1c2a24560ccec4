use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curvature_engine::CurvatureReport;
use crate::error::{Error, Result};
use crate::surface_catalog::{AmbientKind, Immersion};

use super::grid::{field_from_reports, sample_reports, GridField, GridSpec, Quantity};

/// Default verdict tolerance.
pub const VERDICT_TOL: f64 = 1e-3;
/// Largest defect accepted as the equality case by [`verify_identity`].
pub const EQUALITY_TOL: f64 = 1e-6;
/// Minimality thresholds on `|<H,H>|` and on the coordinate norm of `H`.
pub const MINIMAL_H2_TOL: f64 = 1e-9;
pub const MINIMAL_H_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    LogHarmonic,
    Subharmonic,
    Neither,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::LogHarmonic => "log-harmonic",
            Verdict::Subharmonic => "subharmonic",
            Verdict::Neither => "neither",
        })
    }
}

/// Laplacian identities `Delta ln(K + s0) = 2 (2K - K^D)` for minimal
/// equality surfaces, one per ambient curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Identity {
    /// `c = -1`, `ln(K + 1)`.
    #[serde(rename = "eq5_11")]
    Hyperbolic,
    /// `c = 0`, `ln K`.
    #[serde(rename = "eq6_6")]
    Flat,
    /// `c = 1`, `ln(K - 1)`.
    #[serde(rename = "eq7_7")]
    Spherical,
}

impl Identity {
    pub const ALL: [Identity; 3] = [Identity::Hyperbolic, Identity::Flat, Identity::Spherical];

    pub fn id(self) -> &'static str {
        match self {
            Identity::Hyperbolic => "eq5_11",
            Identity::Flat => "eq6_6",
            Identity::Spherical => "eq7_7",
        }
    }

    pub fn ambient_curvature(self) -> f64 {
        match self {
            Identity::Hyperbolic => -1.0,
            Identity::Flat => 0.0,
            Identity::Spherical => 1.0,
        }
    }

    pub fn quantity(self) -> Quantity {
        match self {
            Identity::Hyperbolic => Quantity::LnKPlus1,
            Identity::Flat => Quantity::LnK,
            Identity::Spherical => Quantity::LnKMinus1,
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Identity::Hyperbolic => "Delta ln(K+1) = 2(2K - K^D)",
            Identity::Flat => "Delta ln(K) = 2(2K - K^D)",
            Identity::Spherical => "Delta ln(K-1) = 2(2K - K^D)",
        }
    }
}

impl FromStr for Identity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|i| i.id() == s)
            .ok_or_else(|| {
                Error::Input(format!(
                    "unknown identity '{s}' (expected eq5_11, eq6_6 or eq7_7)"
                ))
            })
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Intrinsic Laplacian of a field at interior nodes, optionally compared with
/// the right-hand side of an identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianReport {
    pub grid: GridSpec,
    pub identity: Option<Identity>,
    /// `Delta f` at interior nodes, `(nx - 2) x (ny - 2)`, `s` slowest.
    pub laplacian: Vec<f64>,
    /// Right-hand side at interior nodes; zero when no identity is checked.
    pub rhs: Vec<f64>,
    /// `laplacian - rhs`.
    pub residual: Vec<f64>,
    pub max_abs_laplacian: f64,
    pub min_laplacian: f64,
    pub max_abs_rhs: f64,
    pub max_abs_residual: f64,
    /// `max |residual| / max |rhs|`; absent when `max |rhs|` is below the verdict tolerance.
    pub relative_residual: Option<f64>,
    pub verdict: Verdict,
    pub verdict_tol: f64,
}

impl LaplacianReport {
    fn build(
        grid: GridSpec,
        identity: Option<Identity>,
        laplacian: Vec<f64>,
        rhs: Vec<f64>,
    ) -> Self {
        let residual: Vec<f64> = laplacian.iter().zip(&rhs).map(|(l, r)| l - r).collect();
        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let max_abs_rhs = max_abs(&rhs);
        let max_abs_residual = max_abs(&residual);
        let mut report = LaplacianReport {
            grid,
            identity,
            max_abs_laplacian: max_abs(&laplacian),
            min_laplacian: laplacian.iter().copied().fold(f64::INFINITY, f64::min),
            max_abs_rhs,
            max_abs_residual,
            relative_residual: (max_abs_rhs > VERDICT_TOL).then(|| max_abs_residual / max_abs_rhs),
            laplacian,
            rhs,
            residual,
            verdict: Verdict::Neither,
            verdict_tol: VERDICT_TOL,
        };
        report.verdict = harmonicity_verdict(&report, VERDICT_TOL);
        report.verdict_tol = VERDICT_TOL;
        report
    }

    /// Interior node coordinates in the storage order of the fields.
    pub fn interior_nodes(&self) -> Vec<(f64, f64)> {
        let g = &self.grid;
        let mut out = Vec::with_capacity((g.nx - 2) * (g.ny - 2));
        for i in 1..g.nx - 1 {
            for j in 1..g.ny - 1 {
                out.push((g.s(i), g.t(j)));
            }
        }
        out
    }

    /// Residual at the interior node `(i, j)` of the full grid.
    pub fn residual_at(&self, i: usize, j: usize) -> f64 {
        self.residual[(i - 1) * (self.grid.ny - 2) + (j - 1)]
    }
}

/// `(1/sqrt g) d_i (sqrt g g^ij d_j f)` at interior nodes. Diagonal fluxes
/// use half-node averages, mixed terms nested central differences.
pub fn intrinsic_laplacian(f: &GridField) -> Result<LaplacianReport> {
    let (nx, ny) = (f.nx, f.ny);
    if nx < 5 || ny < 5 {
        return Err(Error::Input(format!(
            "intrinsic Laplacian needs at least 5x5 nodes, got {nx}x{ny}"
        )));
    }
    let grid = f.grid();
    let (hs, ht) = grid.spacing();
    let n = nx * ny;
    let mut root = vec![0.0; n];
    let mut pss = vec![0.0; n];
    let mut pst = vec![0.0; n];
    let mut ptt = vec![0.0; n];
    for k in 0..n {
        let det = f.e[k] * f.g[k] - f.f[k] * f.f[k];
        let r = det.sqrt();
        root[k] = r;
        pss[k] = r * f.g[k] / det;
        pst[k] = -r * f.f[k] / det;
        ptt[k] = r * f.e[k] / det;
    }
    let idx = |i: usize, j: usize| i * ny + j;
    let v = &f.values;
    let ds = |i: usize, j: usize| (v[idx(i + 1, j)] - v[idx(i - 1, j)]) / (2.0 * hs);
    let dt = |i: usize, j: usize| (v[idx(i, j + 1)] - v[idx(i, j - 1)]) / (2.0 * ht);

    let mut lap = Vec::with_capacity((nx - 2) * (ny - 2));
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            let c = idx(i, j);
            let half = |a: usize, b: usize, p: &[f64]| 0.5 * (p[a] + p[b]);
            let flux_s = half(idx(i + 1, j), c, &pss) * (v[idx(i + 1, j)] - v[c])
                - half(c, idx(i - 1, j), &pss) * (v[c] - v[idx(i - 1, j)]);
            let flux_t = half(idx(i, j + 1), c, &ptt) * (v[idx(i, j + 1)] - v[c])
                - half(c, idx(i, j - 1), &ptt) * (v[c] - v[idx(i, j - 1)]);
            let mixed_s = (pst[idx(i + 1, j)] * dt(i + 1, j) - pst[idx(i - 1, j)] * dt(i - 1, j))
                / (2.0 * hs);
            let mixed_t = (pst[idx(i, j + 1)] * ds(i, j + 1) - pst[idx(i, j - 1)] * ds(i, j - 1))
                / (2.0 * ht);
            lap.push((flux_s / (hs * hs) + flux_t / (ht * ht) + mixed_s + mixed_t) / root[c]);
        }
    }
    let rhs = vec![0.0; lap.len()];
    Ok(LaplacianReport::build(grid, None, lap, rhs))
}

/// Classify the Laplacian field of a report: log-harmonic when it vanishes
/// to `tol`, else subharmonic when it is `>= -tol` everywhere.
pub fn harmonicity_verdict(report: &LaplacianReport, tol: f64) -> Verdict {
    if report.max_abs_laplacian <= tol {
        Verdict::LogHarmonic
    } else if report.min_laplacian >= -tol {
        Verdict::Subharmonic
    } else {
        Verdict::Neither
    }
}

fn check_preconditions(
    imm: &Immersion,
    which: Identity,
    reports: &[CurvatureReport],
) -> Result<()> {
    let ambient = imm.ambient();
    let want = which.ambient_curvature();
    let kind_ok = match which {
        Identity::Hyperbolic => ambient.kind() == AmbientKind::PseudoHyperbolic,
        Identity::Flat => ambient.kind() == AmbientKind::Flat,
        Identity::Spherical => ambient.kind() == AmbientKind::PseudoSphere,
    };
    if !kind_ok || ambient.curvature() != want {
        return Err(Error::Precondition(format!(
            "{} applies to ambient curvature c = {want}, but '{}' lives in {}",
            which,
            imm.name(),
            ambient
        )));
    }
    for r in reports {
        if r.defect.abs() > EQUALITY_TOL {
            return Err(Error::Precondition(format!(
                "{which} needs the equality case; defect {:e} at (s, t) = ({}, {})",
                r.defect, r.s, r.t
            )));
        }
        if r.h2.abs() > MINIMAL_H2_TOL || r.mean_curvature_norm() > MINIMAL_H_TOL {
            return Err(Error::Precondition(format!(
                "{which} needs a minimal surface; |H| = {:e} at (s, t) = ({}, {})",
                r.mean_curvature_norm(),
                r.s,
                r.t
            )));
        }
    }
    Ok(())
}

/// Check one of the Laplacian identities on a grid. `K^D` on the right-hand
/// side is taken in the orientation realizing the equality case.
pub fn verify_identity(
    imm: &Immersion,
    which: Identity,
    grid: &GridSpec,
) -> Result<LaplacianReport> {
    let reports = sample_reports(imm, grid)?;
    check_preconditions(imm, which, &reports)?;
    let field = field_from_reports(&reports, which.quantity(), grid)?;
    let lap = intrinsic_laplacian(&field)?;
    let mut rhs = Vec::with_capacity(lap.laplacian.len());
    for i in 1..grid.nx - 1 {
        for j in 1..grid.ny - 1 {
            let r = &reports[grid.index(i, j)];
            rhs.push(2.0 * (2.0 * r.k - r.equality_sign * r.kd));
        }
    }
    Ok(LaplacianReport::build(
        *grid,
        Some(which),
        lap.laplacian,
        rhs,
    ))
}

/// Residuals of [`verify_identity`] under grid refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub sizes: Vec<usize>,
    /// Largest residual over the interior nodes of the coarsest grid.
    pub errors: Vec<f64>,
    /// `errors[k] / errors[k + 1]`.
    pub ratios: Vec<f64>,
}

/// Accepted band for error ratios under step halving of a second-order scheme.
pub const SECOND_ORDER_RATIO: (f64, f64) = (3.2, 4.8);
/// Errors below this are treated as exact to roundoff and exempt from the ratio test.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

/// True when each successive pair of errors shrinks by a factor in `band`,
/// skipping pairs whose finer error is already below `floor`.
pub fn second_order_convergence(errors: &[f64], band: (f64, f64), floor: f64) -> bool {
    errors.windows(2).all(|w| {
        if w[1] <= floor {
            return w[0] <= floor || w[0] / w[1] >= band.0;
        }
        let r = w[0] / w[1];
        r >= band.0 && r <= band.1
    })
}

impl RefinementStudy {
    /// Ratio test with [`SECOND_ORDER_RATIO`] and [`ROUNDOFF_FLOOR`].
    pub fn is_second_order(&self) -> bool {
        second_order_convergence(&self.errors, SECOND_ORDER_RATIO, ROUNDOFF_FLOOR)
    }
}

/// Run [`verify_identity`] on `n x n` grids whose sizes satisfy
/// `n_{k+1} - 1 = 2 (n_k - 1)` and compare residuals on shared nodes.
pub fn refinement_study(
    imm: &Immersion,
    which: Identity,
    domain: crate::surface_catalog::Domain,
    sizes: &[usize],
) -> Result<RefinementStudy> {
    let coarse = *sizes
        .first()
        .ok_or_else(|| Error::Input("no grid sizes given".into()))?;
    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if (n - 1) % (coarse - 1) != 0 {
            return Err(Error::Input(format!(
                "grid {n} does not refine grid {coarse}"
            )));
        }
        let stride = (n - 1) / (coarse - 1);
        let report = verify_identity(imm, which, &GridSpec::new(n, n, domain)?)?;
        let mut worst: f64 = 0.0;
        for i in 1..coarse - 1 {
            for j in 1..coarse - 1 {
                worst = worst.max(report.residual_at(i * stride, j * stride).abs());
            }
        }
        errors.push(worst);
    }
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(RefinementStudy {
        sizes: sizes.to_vec(),
        errors,
        ratios,
    })
}
