//! Parsing of loss files, p-value files and R̂ grids.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Number of rows in the n = 100, alpha = 0.1 comparison table.
pub const TABLE_ROWS: u32 = 45;
/// The table's R̂ grid is `i / 660`, `i = 0..45`.
pub const TABLE_DENOMINATOR: f64 = 660.0;

fn open(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin()));
    }
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(f))
}

/// Reads a one-column CSV with the given header and values in `[0, 1]`.
/// Row numbers in errors count data rows from 1.
fn read_unit_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let headers = rdr
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?
        .clone();
    if headers.len() != 1 || &headers[0] != column {
        bail!(
            "{}: expected a single column named '{column}', found header {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        );
    }
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record =
            record.with_context(|| format!("{}: row {row}: malformed CSV", path.display()))?;
        let field = record.get(0).unwrap_or("");
        let v: f64 = field.parse().with_context(|| {
            format!(
                "{}: row {row}: cannot parse '{field}' as a number",
                path.display()
            )
        })?;
        if !(0.0..=1.0).contains(&v) {
            bail!("{}: row {row}: {column} {v} outside [0, 1]", path.display());
        }
        values.push(v);
    }
    if values.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(values)
}

/// Losses from a CSV whose only column is `loss`.
pub fn read_losses(path: &Path) -> Result<Vec<f64>> {
    read_unit_column(path, "loss")
}

/// P-values from a CSV whose only column is `pvalue`.
pub fn read_pvalues(path: &Path) -> Result<Vec<f64>> {
    read_unit_column(path, "pvalue")
}

/// R̂ grid: `table`, `START:STEP:STOP` (inclusive), or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let grid = if spec == "table" {
        (0..TABLE_ROWS)
            .map(|i| i as f64 / TABLE_DENOMINATOR)
            .collect()
    } else if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, step, stop] = parts.as_slice() else {
            bail!("--grid: expected START:STEP:STOP, got '{spec}'");
        };
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .with_context(|| format!("--grid: cannot parse '{s}'"))
        };
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if !(step > 0.0) || !(start <= stop) {
            bail!("--grid: need STEP > 0 and START <= STOP, got '{spec}'");
        }
        let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
        (0..count)
            .map(|i| (start + i as f64 * step).min(stop))
            .collect()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("--grid: cannot parse '{s}'"))
            })
            .collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        bail!("--grid: empty grid");
    }
    if let Some(x) = grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        bail!("--grid: value {x} outside [0, 1]");
    }
    Ok(grid)
}

/// Rounds half away from zero to `digits` decimals.
pub fn round_half_away(x: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    (x * scale).round() / scale
}

pub fn fmt_rounded(x: f64, digits: u32) -> String {
    format!("{:.*}", digits as usize, round_half_away(x, digits))
}
