//! Fixed-format numeric output shared by the CSV writers.

use std::io::Write;

/// 17 significant digits, so that every `f64` round-trips.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv_row<W: Write>(
    w: &mut W,
    values: impl IntoIterator<Item = f64>,
) -> std::io::Result<()> {
    let row: Vec<String> = values.into_iter().map(fmt_float).collect();
    writeln!(w, "{}", row.join(","))
}
