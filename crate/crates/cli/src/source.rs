use std::path::Path;

use wintgen_core::expr_parser::parse_surface_named;
use wintgen_core::field_analysis::GridSpec;
use wintgen_core::surface_catalog::{catalog_get, Domain, Immersion, Params, SPACELIKE_SAMPLES};

use crate::error::CliError;
use crate::SurfaceArgs;

/// Build the immersion selected by the surface flags.
pub fn resolve(args: &SurfaceArgs) -> Result<Immersion, CliError> {
    let params = parse_params(args)?;
    let imm = match (&args.surface, &args.file) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either a catalog name or --file, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "no surface given (catalog name or --file)".into(),
            ))
        }
        (Some(name), None) => catalog_get(name, &params)?,
        (None, Some(path)) => {
            if !params.is_empty() {
                return Err(CliError::Usage(
                    "--param and --seed apply to catalog surfaces only".into(),
                ));
            }
            load_file(path)?
        }
    };
    match &args.domain {
        None => Ok(imm),
        Some(text) => {
            let domain: Domain = text.parse()?;
            let imm = imm.with_domain(domain);
            imm.ensure_space_like(SPACELIKE_SAMPLES)?;
            Ok(imm)
        }
    }
}

fn load_file(path: &Path) -> Result<Immersion, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "user".into());
    let def = parse_surface_named(&name, &text)
        .map_err(|e| CliError::Usage(format!("{}:{e}", path.display())))?;
    let imm = Immersion::from_definition(def);
    imm.ensure_space_like(SPACELIKE_SAMPLES)?;
    Ok(imm)
}

fn parse_params(args: &SurfaceArgs) -> Result<Params, CliError> {
    let mut params = Params::new();
    for raw in &args.params {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--param expects key=value, got '{raw}'")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(seed) = args.seed {
        if params.insert("seed".into(), seed.to_string()).is_some() {
            return Err(CliError::Usage(
                "seed given both as --seed and --param".into(),
            ));
        }
    }
    Ok(params)
}

pub fn grid(text: &str, imm: &Immersion) -> Result<GridSpec, CliError> {
    let (nx, ny) = GridSpec::parse_size(text)?;
    Ok(GridSpec::new(nx, ny, imm.domain())?)
}

/// Name with parameters, e.g. `holomorphic_graph[f=z^3/3]`.
pub fn label(imm: &Immersion) -> String {
    if imm.params().is_empty() {
        return imm.name().to_string();
    }
    let p: Vec<String> = imm
        .params()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!("{}[{}]", imm.name(), p.join(","))
}
