use std::fs::File;
use std::io::{BufWriter, Write};

use wintgen_core::field_analysis::{sample_field, Quantity};

use crate::error::CliError;
use crate::{source, Format, MapArgs};

pub fn run(args: &MapArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.format == Format::Text {
        return Err(CliError::Usage("defect-map writes csv or json".into()));
    }
    let quantity: Quantity = args.quantity.parse()?;
    let imm = source::resolve(&args.surface)?;
    let grid = source::grid(&args.grid, &imm)?;
    let field = sample_field(&imm, quantity, &grid)?;

    let write = |w: &mut dyn Write| -> Result<(), CliError> {
        match args.format {
            Format::Json => {
                w.write_all(field.to_json()?.as_bytes())?;
                writeln!(w)?;
            }
            _ => field.write_csv(&mut *w)?,
        }
        Ok(())
    };
    match &args.out {
        None => write(out),
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
            writeln!(
                out,
                "wrote {} of {} on {} to {}",
                quantity,
                source::label(&imm),
                grid,
                path.display()
            )?;
            Ok(())
        }
    }
}
