use std::path::Path;

use ndarray::{Array2, ArrayView2};

use super::{read_text, write_atomic};
use crate::error::{EctError, Result};

/// Parsed OFF mesh. Polygons with more than three vertices have already been
/// fan-triangulated; `fanned_faces` counts them.
#[derive(Debug, Clone, PartialEq)]
pub struct OffMesh {
    pub coordinates: Array2<f64>,
    pub triangles: Vec<[usize; 3]>,
    pub fanned_faces: usize,
}

/// Reads an OFF file: an `OFF` header, a `nV nF nE` counts line, `nV`
/// vertex lines of three reals and `nF` face lines `m i_1 .. i_m`.
/// `#` starts a comment; blank lines are skipped.
pub fn read_off_mesh(path: impl AsRef<Path>) -> Result<OffMesh> {
    let path = path.as_ref();
    let text = read_text(path)?;
    parse_off(&text).map_err(|(line, message)| EctError::parse(path, line, message))
}

/// Writes a triangle mesh as OFF with round-trip coordinates.
pub fn write_off_mesh(path: impl AsRef<Path>, coordinates: ArrayView2<'_, f64>, triangles: &[[usize; 3]]) -> Result<()> {
    if coordinates.ncols() != 3 {
        return Err(EctError::ShapeMismatch(format!(
            "OFF stores 3D vertices, got {} columns",
            coordinates.ncols()
        )));
    }
    let mut out = format!("OFF\n{} {} 0\n", coordinates.nrows(), triangles.len());
    for row in coordinates.rows() {
        out.push_str(&format!("{:?} {:?} {:?}\n", row[0], row[1], row[2]));
    }
    for [a, b, c] in triangles {
        out.push_str(&format!("3 {a} {b} {c}\n"));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

type ParseResult<T> = std::result::Result<T, (usize, String)>;

fn parse_off(text: &str) -> ParseResult<OffMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let last_line = text.lines().count().max(1);

    let (line, header) = lines.next().ok_or((1, "missing OFF header".to_string()))?;
    // Some writers put the counts on the header line itself.
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err((line, format!("expected `OFF` header, found {header:?}")));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let (count_line, counts): (usize, Vec<&str>) = if rest.is_empty() {
        let (l, c) = lines
            .next()
            .ok_or((last_line, "missing counts line".to_string()))?;
        (l, c.split_whitespace().collect())
    } else {
        (line, rest)
    };
    if counts.len() < 2 {
        return Err((count_line, "counts line needs `nV nF [nE]`".into()));
    }
    let parse_count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| (count_line, format!("invalid count {s:?}")))
    };
    let nv = parse_count(counts[0])?;
    let nf = parse_count(counts[1])?;

    let mut coordinates = Array2::zeros((nv, 3));
    for v in 0..nv {
        let (line, content) = lines
            .next()
            .ok_or((last_line, format!("file ends after {v} of {nv} vertices")))?;
        let values: Vec<&str> = content.split_whitespace().collect();
        if values.len() != 3 {
            return Err((line, format!("expected 3 coordinates, found {}", values.len())));
        }
        for (c, tok) in values.iter().enumerate() {
            coordinates[[v, c]] = tok
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or((line, format!("invalid coordinate {tok:?}")))?;
        }
    }

    let mut triangles = Vec::with_capacity(nf);
    let mut fanned_faces = 0;
    for f in 0..nf {
        let (line, content) = lines
            .next()
            .ok_or((last_line, format!("file ends after {f} of {nf} faces")))?;
        let tokens: Vec<usize> = content
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| (line, format!("invalid index {t:?}"))))
            .collect::<ParseResult<_>>()?;
        let (&m, rest) = tokens
            .split_first()
            .ok_or((line, "empty face line".to_string()))?;
        if m < 3 || rest.len() < m {
            return Err((line, format!("face declares {m} vertices but lists {}", rest.len())));
        }
        // Extra tokens after the indices are per-face colors.
        let idx = &rest[..m];
        if let Some(&bad) = idx.iter().find(|&&i| i >= nv) {
            return Err((line, format!("vertex index {bad} out of range (nV = {nv})")));
        }
        if m > 3 {
            fanned_faces += 1;
        }
        for i in 1..m - 1 {
            triangles.push([idx[0], idx[i], idx[i + 1]]);
        }
    }
    Ok(OffMesh {
        coordinates,
        triangles,
        fanned_faces,
    })
}
