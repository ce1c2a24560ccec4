use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use wintgen_core::curvature_engine::{codazzi_residual, structure_equation_check, CurvatureReport};
use wintgen_core::field_analysis::{sample_reports, GridSpec};
use wintgen_core::surface_catalog::{check_membership, Immersion};

use crate::error::CliError;
use crate::tolerances::{Tolerances, FD_STEP};
use crate::{sci, source, Format, VerifyArgs};

/// Nodes per axis used for the finite-difference checks.
pub const DERIVATIVE_SAMPLES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stats {
        let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Stats {
            min,
            max,
            mean: sum / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    #[serde(rename = "K")]
    pub k: Stats,
    #[serde(rename = "KD")]
    pub kd: Stats,
    #[serde(rename = "H2")]
    pub h2: Stats,
    pub defect: Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=-")]
    AtLeastMinus,
}

/// One pass/fail check with the tolerance it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub label: &'static str,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn at_most(name: &'static str, label: &'static str, value: f64, tolerance: f64) -> Check {
        Check {
            name,
            label,
            value,
            relation: Relation::AtMost,
            tolerance,
            passed: value <= tolerance,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: Option<String>) -> Check {
        if detail.is_some() {
            self.passed = false;
        }
        self.detail = detail;
        self
    }
}

/// Informational yes/no classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictEntry {
    pub name: &'static str,
    pub label: &'static str,
    pub holds: bool,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub surface: String,
    pub params: wintgen_core::surface_catalog::Params,
    pub ambient: String,
    pub grid: GridSpec,
    pub fd_step: f64,
    pub derivative_nodes: usize,
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub verdicts: Vec<VerdictEntry>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failed_checks(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.to_string())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&VerdictEntry> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Evenly spread subset of at most `m x m` grid nodes, corners included.
pub fn derivative_nodes(grid: &GridSpec, m: usize) -> Vec<(f64, f64)> {
    let pick = |n: usize| -> Vec<usize> {
        let m = m.min(n);
        let mut idx: Vec<usize> = (0..m)
            .map(|k| (k * (n - 1) + (m - 1) / 2) / (m - 1))
            .collect();
        idx.dedup();
        idx
    };
    let (is, js) = (pick(grid.nx), pick(grid.ny));
    is.iter()
        .flat_map(|&i| js.iter().map(move |&j| (grid.s(i), grid.t(j))))
        .collect()
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

fn first_error<T>(results: &[(f64, f64, wintgen_core::Result<T>)]) -> Option<String> {
    results.iter().find_map(|(s, t, r)| {
        r.as_ref()
            .err()
            .map(|e| format!("failed at (s, t) = ({s}, {t}): {e}"))
    })
}

/// Run the full check battery on `grid`.
pub fn verify(
    imm: &Immersion,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<VerificationReport, CliError> {
    let reports = sample_reports(imm, grid)?;
    let nodes = grid.nodes();
    let defect_tol = tol.get("defect");
    let mut checks = Vec::new();

    if imm.ambient().membership_target().is_some() {
        let r = check_membership(imm, &nodes)?;
        checks.push(Check::at_most(
            "membership",
            "position lies on the quadric <x,x> = 1/c",
            r,
            tol.get("membership"),
        ));
    }

    let shape = reports
        .iter()
        .map(|r| r.shape_residual.max(r.frame_residual));
    checks.push(Check::at_most(
        "shape_consistency",
        "orthonormal frame and <h(e_i,e_j), e_r> = <A_r e_i, e_j>",
        max_abs(shape),
        tol.get("shape_consistency"),
    ));

    let min_defect = reports
        .iter()
        .map(|r| r.defect)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "inequality",
        label: "K + K^D >= <H,H> + c at every node",
        value: min_defect,
        relation: Relation::AtLeastMinus,
        tolerance: defect_tol,
        passed: min_defect >= -defect_tol,
        detail: None,
    });

    let equality: Vec<&CurvatureReport> =
        reports.iter().filter(|r| r.defect <= defect_tol).collect();
    let note = |n: usize| format!("{n} of {} nodes in the equality case", reports.len());
    let mut canonical = Check::at_most(
        "canonical",
        "equality nodes admit the normal form diag(2g+m, m), offdiag g",
        max_abs(equality.iter().map(|r| r.canonical.residual)),
        tol.get("canonical"),
    );
    canonical.detail = Some(note(equality.len()));
    checks.push(canonical);

    let bad_ellipse = equality
        .iter()
        .filter(|r| !(r.ellipse.is_circle || r.ellipse.is_point))
        .count();
    let mut ellipse = Check::at_most(
        "ellipse",
        "equality nodes have a circular or point ellipse of curvature",
        bad_ellipse as f64,
        0.0,
    );
    ellipse.detail = Some(note(equality.len()));
    checks.push(ellipse);

    let sample = derivative_nodes(grid, DERIVATIVE_SAMPLES);
    let structure: Vec<_> = sample
        .par_iter()
        .map(|&p| {
            let r = structure_equation_check(imm, p, FD_STEP).map(|st| {
                let rep = &reports[nearest_index(grid, p)];
                (st.k_from_omega - rep.k)
                    .abs()
                    .max((st.kd_from_omega - rep.kd).abs())
            });
            (p.0, p.1, r)
        })
        .collect();
    checks.push(
        Check::at_most(
            "structure",
            "curvatures from connection forms match the Gauss and Ricci equations",
            max_abs(structure.iter().filter_map(|x| x.2.as_ref().ok().copied())),
            tol.get("structure"),
        )
        .with_detail(first_error(&structure)),
    );

    let codazzi: Vec<_> = sample
        .par_iter()
        .map(|&p| (p.0, p.1, codazzi_residual(imm, p, FD_STEP)))
        .collect();
    checks.push(
        Check::at_most(
            "codazzi",
            "Codazzi equation (nabla_X h)(Y,Z) = (nabla_Y h)(X,Z)",
            max_abs(codazzi.iter().filter_map(|x| x.2.as_ref().ok().copied())),
            tol.get("codazzi"),
        )
        .with_detail(first_error(&codazzi)),
    );

    let max_h = max_abs(reports.iter().map(|r| r.mean_curvature_norm()));
    let max_h2 = max_abs(reports.iter().map(|r| r.h2));
    let max_defect = reports
        .iter()
        .map(|r| r.defect)
        .fold(f64::NEG_INFINITY, f64::max);
    let kd_2k = max_abs(reports.iter().map(|r| r.equality_sign * r.kd - 2.0 * r.k));
    let non_circle = reports
        .iter()
        .filter(|r| !(r.ellipse.is_circle || r.ellipse.is_point))
        .count();
    let verdicts = vec![
        VerdictEntry {
            name: "minimal",
            label: "mean curvature vector vanishes",
            holds: max_h <= tol.get("minimal_h") && max_h2 <= tol.get("minimal_h2"),
            measured: max_h,
            tolerance: tol.get("minimal_h"),
        },
        VerdictEntry {
            name: "equality",
            label: "K + K^D = <H,H> + c at every node",
            holds: max_defect <= defect_tol,
            measured: max_defect,
            tolerance: defect_tol,
        },
        VerdictEntry {
            name: "kd_equals_2k",
            label: "K^D = 2K in the equality orientation",
            holds: kd_2k <= defect_tol,
            measured: kd_2k,
            tolerance: defect_tol,
        },
        VerdictEntry {
            name: "circular_ellipse",
            label: "ellipse of curvature is a circle or a point at every node",
            holds: non_circle == 0,
            measured: non_circle as f64,
            tolerance: 0.0,
        },
    ];

    let summary = Summary {
        k: Stats::of(reports.iter().map(|r| r.k)),
        kd: Stats::of(reports.iter().map(|r| r.kd)),
        h2: Stats::of(reports.iter().map(|r| r.h2)),
        defect: Stats::of(reports.iter().map(|r| r.defect)),
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        surface: source::label(imm),
        params: imm.params().clone(),
        ambient: imm.ambient().descriptor(),
        grid: *grid,
        fd_step: FD_STEP,
        derivative_nodes: sample.len(),
        summary,
        checks,
        verdicts,
        passed,
    })
}

fn nearest_index(grid: &GridSpec, p: (f64, f64)) -> usize {
    let (hs, ht) = grid.spacing();
    let i = ((p.0 - grid.domain.s0) / hs).round() as usize;
    let j = ((p.1 - grid.domain.t0) / ht).round() as usize;
    grid.index(i.min(grid.nx - 1), j.min(grid.ny - 1))
}

pub fn run(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let tol = Tolerances::from_overrides(&args.tol)?;
    let imm = source::resolve(&args.surface)?;
    let grid = source::grid(&args.grid, &imm)?;
    let report = verify(&imm, &grid, &tol)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(&report, out)?,
        Format::Text => write_text(&report, out)?,
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(report.failed_checks()))
    }
}

fn write_text(r: &VerificationReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "surface   {}", r.surface)?;
    writeln!(out, "ambient   {}", r.ambient)?;
    writeln!(out, "grid      {}", r.grid)?;
    writeln!(
        out,
        "fd step   {} ({} nodes for derivative checks)",
        r.fd_step, r.derivative_nodes
    )?;
    writeln!(out)?;
    writeln!(out, "{:<8}{:>12}{:>12}{:>12}", "", "min", "max", "mean")?;
    let s = &r.summary;
    for (name, st) in [
        ("K", &s.k),
        ("K^D", &s.kd),
        ("<H,H>", &s.h2),
        ("defect", &s.defect),
    ] {
        writeln!(
            out,
            "{name:<8}{:>12}{:>12}{:>12}",
            sci(st.min),
            sci(st.max),
            sci(st.mean)
        )?;
    }
    writeln!(out)?;
    writeln!(out, "checks")?;
    for c in &r.checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeastMinus => ">=",
        };
        writeln!(
            out,
            "  [{}] {:<18} {} {rel} {}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            sci(c.value),
            match c.relation {
                Relation::AtMost => sci(c.tolerance),
                Relation::AtLeastMinus => sci(-c.tolerance),
            },
            c.label
        )?;
        if let Some(d) = &c.detail {
            writeln!(out, "         {:<18} {d}", "")?;
        }
    }
    writeln!(out)?;
    writeln!(out, "verdicts")?;
    for v in &r.verdicts {
        writeln!(
            out,
            "  {:<16} {:<3}  measured {} (tol {})  {}",
            v.name,
            if v.holds { "yes" } else { "no" },
            sci(v.measured),
            sci(v.tolerance),
            v.label
        )?;
    }
    writeln!(out)?;
    writeln!(out, "result    {}", if r.passed { "PASS" } else { "FAIL" })
}

fn write_csv(r: &VerificationReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "kind,name,value,tolerance,passed")?;
    let s = &r.summary;
    for (name, st) in [
        ("K", &s.k),
        ("KD", &s.kd),
        ("H2", &s.h2),
        ("defect", &s.defect),
    ] {
        for (stat, v) in [("min", st.min), ("max", st.max), ("mean", st.mean)] {
            writeln!(out, "summary,{name}.{stat},{v:e},,")?;
        }
    }
    for c in &r.checks {
        let tol = match c.relation {
            Relation::AtMost => c.tolerance,
            Relation::AtLeastMinus => -c.tolerance,
        };
        writeln!(out, "check,{},{:e},{:e},{}", c.name, c.value, tol, c.passed)?;
    }
    for v in &r.verdicts {
        writeln!(
            out,
            "verdict,{},{:e},{:e},{}",
            v.name, v.measured, v.tolerance, v.holds
        )?;
    }
    Ok(())
}
