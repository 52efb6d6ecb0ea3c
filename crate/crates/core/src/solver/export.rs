use std::io::Write;
use std::path::Path;

use crate::discretization::SpaceTimeField;
use crate::Result;

/// CSV with columns `t, x1[, x2], u`, one row per stored time and interior node.
pub fn write_solution_csv_to<W: Write>(field: &SpaceTimeField, out: W) -> Result<()> {
    let grid = field.grid();
    let mut w = csv::Writer::from_writer(out);
    if grid.dim() == 1 {
        w.write_record(["t", "x1", "u"])?;
    } else {
        w.write_record(["t", "x1", "x2", "u"])?;
    }
    for f in field.fields() {
        for &i in grid.interior_nodes() {
            let x = grid.coord(i);
            let mut row = vec![f.time().to_string(), x[0].to_string()];
            if grid.dim() == 2 {
                row.push(x[1].to_string());
            }
            row.push(f.value(i).to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_solution_csv(field: &SpaceTimeField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_solution_csv_to(field, std::io::BufWriter::new(file))
}
