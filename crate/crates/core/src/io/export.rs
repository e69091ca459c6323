use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};

use super::{read_text, write_atomic};
use crate::ect::{Strategy, ThresholdGrid};
use crate::error::{EctError, Result};

/// Integral values print without a fractional part; everything else uses the
/// shortest representation that parses back to the same `f64`.
pub(crate) fn format_value(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn check_finite(values: ArrayView2<'_, f64>) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EctError::InvalidParameter("matrix contains non-finite entries".into()));
    }
    Ok(())
}

/// Writes an `l×k` matrix as CSV. The header row is `threshold,0,1,..,k-1`
/// and each row starts with its threshold. Under a per-direction grid a row
/// has no single threshold, so the first column is `row` with the row index.
pub fn write_matrix_csv(path: impl AsRef<Path>, values: ArrayView2<'_, f64>, grid: &ThresholdGrid) -> Result<()> {
    let path = path.as_ref();
    check_finite(values)?;
    if grid.l() != values.nrows() {
        return Err(EctError::ShapeMismatch(format!(
            "{} thresholds for {} rows",
            grid.l(),
            values.nrows()
        )));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let first = match grid.strategy() {
        Strategy::Global => "threshold",
        Strategy::PerDirection => "row",
    };
    let mut header = vec![first.to_string()];
    header.extend((0..values.ncols()).map(|j| j.to_string()));
    writer.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (i, row) in values.rows().into_iter().enumerate() {
        let label = match grid {
            ThresholdGrid::Global(t) => format!("{:?}", t[i]),
            ThresholdGrid::PerDirection { .. } => i.to_string(),
        };
        let mut record = vec![label];
        record.extend(row.iter().map(|&x| format_value(x)));
        writer.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| EctError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

fn csv_error(path: &Path, e: csv::Error) -> EctError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    EctError::parse(path, line, e.to_string())
}

/// Contents of a CSV written by [`write_matrix_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub strategy: Strategy,
    /// Thresholds (global grid) or row indices (per-direction grid).
    pub row_labels: Vec<f64>,
    pub values: Array2<f64>,
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<CsvMatrix> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let strategy = match headers.get(0) {
        Some("threshold") => Strategy::Global,
        Some("row") => Strategy::PerDirection,
        other => {
            return Err(EctError::parse(
                path,
                1,
                format!("expected `threshold` or `row` as first header, found {other:?}"),
            ))
        }
    };
    let k = headers.len() - 1;
    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        if record.len() != k + 1 {
            return Err(EctError::parse(path, line, format!("expected {} fields", k + 1)));
        }
        for (c, field) in record.iter().enumerate() {
            let x: f64 = field
                .parse()
                .map_err(|_| EctError::parse(path, line, format!("invalid number {field:?}")))?;
            if c == 0 {
                row_labels.push(x);
            } else {
                values.push(x);
            }
        }
    }
    let values = Array2::from_shape_vec((row_labels.len(), k), values).expect("row widths checked");
    Ok(CsvMatrix {
        strategy,
        row_labels,
        values,
    })
}

/// Affine map used for a PGM export: `gray = round((x - min) / (max - min) * 65535)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScaling {
    pub min: f64,
    pub max: f64,
}

impl PgmScaling {
    pub fn gray(&self, x: f64) -> u16 {
        if self.max > self.min {
            ((x - self.min) / (self.max - self.min) * 65535.0).round() as u16
        } else {
            0
        }
    }
}

pub(crate) fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes a 16-bit plain (P2) PGM with one image row per matrix row, so the
/// lowest threshold is the top row. The min-max scaling goes to
/// `<path>.meta`.
pub fn write_matrix_pgm(path: impl AsRef<Path>, values: ArrayView2<'_, f64>) -> Result<PgmScaling> {
    let path = path.as_ref();
    check_finite(values)?;
    if values.is_empty() {
        return Err(EctError::InvalidParameter("cannot export an empty matrix".into()));
    }
    let scaling = PgmScaling {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let (height, width) = values.dim();
    let mut out = format!("P2\n{width} {height}\n65535\n");
    for row in values.rows() {
        let line: Vec<String> = row.iter().map(|&x| scaling.gray(x).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())?;
    let meta = format!(
        "min {:?}\nmax {:?}\nwidth {width}\nheight {height}\n",
        scaling.min, scaling.max
    );
    write_atomic(&sidecar_path(path), meta.as_bytes())?;
    Ok(scaling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pgm_affine_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let scaling = write_matrix_pgm(&path, array![[0.0, 1.0], [2.0, 3.0]].view()).unwrap();
        assert_eq!(scaling, PgmScaling { min: 0.0, max: 3.0 });
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "P2\n2 2\n65535\n0 21845\n43690 65535\n");
        let meta = std::fs::read_to_string(sidecar_path(&path)).unwrap();
        assert!(meta.starts_with("min 0.0\nmax 3.0\n"));
    }

    #[test]
    fn pgm_constant_matrix_is_flat() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        write_matrix_pgm(&path, Array2::from_elem((3, 4), 7.0).view()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let grays: Vec<&str> = text.lines().skip(3).flat_map(str::split_whitespace).collect();
        assert_eq!(grays.len(), 12);
        assert!(grays.iter().all(|g| *g == grays[0]));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let values = array![[0.1, 2.0], [1.0 / 3.0, -7.25e-9], [5.0, 6.0]];
        let grid = ThresholdGrid::global(vec![-1.0, 0.1, 1.0]).unwrap();
        write_matrix_csv(&path, values.view(), &grid).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("threshold,0,1\n-1.0,0.1,2\n"));
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back.values, values);
        assert_eq!(back.row_labels, vec![-1.0, 0.1, 1.0]);
        assert_eq!(back.strategy, Strategy::Global);
    }

    #[test]
    fn non_finite_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        assert!(write_matrix_pgm(&path, array![[f64::NAN]].view()).is_err());
        assert!(!path.exists());
    }
}
