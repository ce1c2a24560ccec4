use std::io::Write;

use wintgen_core::surface_catalog::catalog_entries;

use crate::error::CliError;
use crate::Format;

pub fn run(format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let entries = catalog_entries();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &entries)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "name,ambient,domain,params")?;
            for e in &entries {
                let params: Vec<String> = e
                    .params
                    .iter()
                    .map(|p| format!("{}={}", p.name, p.default))
                    .collect();
                writeln!(
                    out,
                    "{},\"{}\",\"{}\",\"{}\"",
                    e.name,
                    e.ambient,
                    e.default_domain,
                    params.join(";")
                )?;
            }
        }
        Format::Text => {
            for e in &entries {
                writeln!(out, "{}", e.name)?;
                writeln!(out, "    ambient  {}", e.ambient)?;
                writeln!(out, "    domain   {}", e.default_domain)?;
                if e.params.is_empty() {
                    writeln!(out, "    params   none")?;
                }
                for p in &e.params {
                    writeln!(
                        out,
                        "    param    {} (default {}): {}",
                        p.name, p.default, p.description
                    )?;
                }
                writeln!(out, "    {}", e.description)?;
            }
        }
    }
    Ok(())
}
