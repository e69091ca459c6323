use std::path::Path;

use ndarray::{Array2, ArrayView2};

use super::{read_text, write_atomic};
use crate::error::{EctError, Result};

/// Reads a whitespace-separated coordinate table, one point per line.
/// Blank lines and `#` comments are skipped; every row must have the same
/// number of columns.
pub fn read_point_cloud_text(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| EctError::parse(path, i + 1, format!("invalid number {tok:?}")))?;
            values.push(x);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(EctError::parse(
                    path,
                    i + 1,
                    format!("expected {w} columns, found {count}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| EctError::parse(path, 1, "no points found"))?;
    Ok(Array2::from_shape_vec((rows, width), values).expect("row widths checked"))
}

/// Writes one point per line with round-trip precision.
pub fn write_point_cloud_text(path: impl AsRef<Path>, points: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = String::new();
    for row in points.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    write_atomic(path.as_ref(), out.as_bytes())
}
