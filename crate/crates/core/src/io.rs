//! Plain-text output: CSV with a schema line, JSON lines for trajectories.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{RadialField, RadialGrid};

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip-safe rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn schema_line(kind: &str) -> String {
    format!("# schema: cnls-{kind} v{SCHEMA_VERSION}")
}

/// Writes `r,re,im` rows after the schema line.
pub fn write_field<W: Write>(mut out: W, u: &RadialField) -> Result<()> {
    writeln!(out, "{}", schema_line("field"))?;
    writeln!(out, "r,re,im")?;
    for (r, z) in u.grid().nodes().iter().zip(u.values()) {
        writeln!(out, "{},{},{}", fmt_f64(*r), fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

/// Reads a field written by [`write_field`] back onto `grid`.
pub fn read_field<R: BufRead>(input: R, grid: &Arc<RadialGrid>) -> Result<RadialField> {
    let mut values = Vec::with_capacity(grid.n());
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("r,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(LabError::Io(format!("expected 3 columns, got {}", cols.len())));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| LabError::Io(format!("{s}: {e}")));
        let r = parse(cols[0])?;
        let i = values.len();
        if i >= grid.n() || (r - grid.nodes()[i]).abs() > 1e-9 * grid.r_max() {
            return Err(LabError::GridMismatch(format!("row {i} at r = {r} does not match the grid")));
        }
        values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    RadialField::from_values(grid, values)
}
