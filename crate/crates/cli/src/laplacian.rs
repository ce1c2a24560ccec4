use std::io::Write;

use serde::Serialize;
use wintgen_core::field_analysis::{
    refinement_study, sample_reports, verify_identity, GridSpec, Identity, RefinementStudy, Verdict,
};
use wintgen_core::surface_catalog::Params;

use crate::error::CliError;
use crate::tolerances::Tolerances;
use crate::verify::Stats;
use crate::{sci, source, Format, LaplacianArgs};

pub const REFINEMENT_SIZES: [usize; 3] = [17, 33, 65];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianCheck {
    pub surface: String,
    pub params: Params,
    pub ambient: String,
    pub identity: Identity,
    pub statement: &'static str,
    pub grid: GridSpec,
    pub max_abs_lhs: f64,
    pub min_lhs: f64,
    pub max_abs_rhs: f64,
    pub max_abs_residual: f64,
    pub relative_residual: Option<f64>,
    pub tolerance: f64,
    pub relative_tolerance: f64,
    pub verdict: Verdict,
    pub verdict_tolerance: f64,
    /// Right-hand side divided by `K` at interior nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_over_k: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementStudy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement_passed: Option<bool>,
    pub residual_passed: bool,
    pub passed: bool,
}

pub fn check(
    imm: &wintgen_core::surface_catalog::Immersion,
    identity: Identity,
    grid: &GridSpec,
    tol: &Tolerances,
    refine: bool,
) -> Result<LaplacianCheck, CliError> {
    let report = verify_identity(imm, identity, grid)?;
    let (abs_tol, rel_tol) = (tol.get("laplacian"), tol.get("laplacian_rel"));
    let residual_passed = report.max_abs_residual <= abs_tol
        || report.relative_residual.is_some_and(|r| r <= rel_tol);

    let reports = sample_reports(imm, grid)?;
    let mut ratios = Vec::with_capacity(report.rhs.len());
    for (k, (i, j)) in (1..grid.nx - 1)
        .flat_map(|i| (1..grid.ny - 1).map(move |j| (i, j)))
        .enumerate()
    {
        let kk = reports[grid.index(i, j)].k;
        if kk.abs() > 1e-12 {
            ratios.push(report.rhs[k] / kk);
        }
    }
    let rhs_over_k = (ratios.len() == report.rhs.len()).then(|| Stats::of(ratios));

    let (refinement, refinement_passed) = if refine {
        let st = refinement_study(imm, identity, imm.domain(), &REFINEMENT_SIZES)?;
        let ok = st.is_second_order();
        (Some(st), Some(ok))
    } else {
        (None, None)
    };
    Ok(LaplacianCheck {
        surface: source::label(imm),
        params: imm.params().clone(),
        ambient: imm.ambient().descriptor(),
        identity,
        statement: identity.statement(),
        grid: *grid,
        max_abs_lhs: report.max_abs_laplacian,
        min_lhs: report.min_laplacian,
        max_abs_rhs: report.max_abs_rhs,
        max_abs_residual: report.max_abs_residual,
        relative_residual: report.relative_residual,
        tolerance: abs_tol,
        relative_tolerance: rel_tol,
        verdict: report.verdict,
        verdict_tolerance: report.verdict_tol,
        rhs_over_k,
        refinement,
        passed: residual_passed && refinement_passed.unwrap_or(true),
        refinement_passed,
        residual_passed,
    })
}

pub fn run(mut args: LaplacianArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.identity.is_none() && args.surface.file.is_some() {
        args.identity = args.surface.surface.take();
    }
    let identity: Identity = args
        .identity
        .as_deref()
        .ok_or_else(|| CliError::Usage("no identity given (eq5_11, eq6_6 or eq7_7)".into()))?
        .parse()?;
    let tol = Tolerances::from_overrides(&args.tol)?;
    let imm = source::resolve(&args.surface)?;
    let grid = source::grid(&args.grid, &imm)?;
    let r = check(&imm, identity, &grid, &tol, args.refine)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &r)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "name,value,tolerance,passed")?;
            writeln!(out, "max_abs_lhs,{:e},,", r.max_abs_lhs)?;
            writeln!(out, "min_lhs,{:e},,", r.min_lhs)?;
            writeln!(out, "max_abs_rhs,{:e},,", r.max_abs_rhs)?;
            writeln!(
                out,
                "max_abs_residual,{:e},{:e},{}",
                r.max_abs_residual, r.tolerance, r.residual_passed
            )?;
            if let Some(rel) = r.relative_residual {
                writeln!(
                    out,
                    "relative_residual,{rel:e},{:e},{}",
                    r.relative_tolerance, r.residual_passed
                )?;
            }
            if let Some(st) = &r.refinement {
                for (k, ratio) in st.ratios.iter().enumerate() {
                    writeln!(
                        out,
                        "refinement_ratio_{},{ratio:e},,{}",
                        k + 1,
                        r.refinement_passed == Some(true)
                    )?;
                }
            }
        }
        Format::Text => write_text(&r, out)?,
    }
    if r.passed {
        Ok(())
    } else {
        let mut failed = Vec::new();
        if !r.residual_passed {
            failed.push("laplacian".to_string());
        }
        if r.refinement_passed == Some(false) {
            failed.push("refinement".to_string());
        }
        Err(CliError::ChecksFailed(failed))
    }
}

fn write_text(r: &LaplacianCheck, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "surface    {}", r.surface)?;
    writeln!(out, "ambient    {}", r.ambient)?;
    writeln!(out, "identity   {}  {}", r.identity, r.statement)?;
    writeln!(out, "grid       {} (interior nodes)", r.grid)?;
    writeln!(out)?;
    writeln!(out, "  max |left side|       {}", sci(r.max_abs_lhs))?;
    writeln!(out, "  min left side         {}", sci(r.min_lhs))?;
    writeln!(out, "  max |right side|      {}", sci(r.max_abs_rhs))?;
    writeln!(
        out,
        "  max |residual|        {}  (tol {})",
        sci(r.max_abs_residual),
        sci(r.tolerance)
    )?;
    match r.relative_residual {
        Some(rel) => writeln!(
            out,
            "  relative residual     {}  (tol {})",
            sci(rel),
            sci(r.relative_tolerance)
        )?,
        None => writeln!(out, "  relative residual     n/a (right side vanishes)")?,
    }
    if let Some(q) = &r.rhs_over_k {
        writeln!(out, "  right side / K        {:.6} .. {:.6}", q.min, q.max)?;
    }
    writeln!(
        out,
        "  verdict on left side  {} (tol {})",
        r.verdict,
        sci(r.verdict_tolerance)
    )?;
    if let Some(st) = &r.refinement {
        writeln!(out)?;
        writeln!(out, "refinement")?;
        for (n, e) in st.sizes.iter().zip(&st.errors) {
            writeln!(
                out,
                "  {n:>3}x{n:<3} max |residual| on shared nodes {}",
                sci(*e)
            )?;
        }
        let ratios: Vec<String> = st.ratios.iter().map(|x| format!("{x:.3}")).collect();
        writeln!(
            out,
            "  ratios {}  [{}]",
            ratios.join(", "),
            if r.refinement_passed == Some(true) {
                "PASS"
            } else {
                "FAIL"
            }
        )?;
    }
    writeln!(out)?;
    writeln!(out, "result     {}", if r.passed { "PASS" } else { "FAIL" })
}
