//! `ECTKIT v1`: a line-oriented, self-describing text archive for exact and
//! smoothed ECT matrices.
//!
//! ```text
//! ECTKIT v1
//! kind smooth                 # or `exact`
//! lambda 100.0                # smooth only
//! source_counts 100           # smooth only, may be empty
//! strategy global             # or `per-direction`
//! shape 64 32                 # rows (thresholds) and columns (directions)
//! dim 2
//! seed 7                      # or `none`
//! config 3f9a...              # or `none`
//! directions angles           # or `vectors`
//! a 0.125                     # one line per direction; `w x_1 .. x_d` for vectors
//! thresholds
//! t -1.0 ... 1.0              # one line for a global grid, one per column
//!                             # otherwise (`flat` marks a degenerate column)
//! values
//! 0 0 ... 1                   # one line per row
//! end
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading an
//! archive back yields bit-identical matrices, directions and thresholds.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use super::export::format_value;
use super::{read_text, write_atomic};
use crate::ect::{EctMatrix, Strategy, ThresholdGrid};
use crate::error::{EctError, Result};
use crate::filtration::DirectionSet;
use crate::soft::SmoothEctMatrix;

pub const ARCHIVE_HEADER: &str = "ECTKIT v1";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub seed: Option<u64>,
    /// Hex digest of the configuration that produced the matrix.
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArchiveBody {
    Exact(EctMatrix),
    Smooth(SmoothEctMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub body: ArchiveBody,
    pub provenance: Provenance,
}

impl Archive {
    pub fn exact(matrix: EctMatrix, provenance: Provenance) -> Self {
        Archive {
            body: ArchiveBody::Exact(matrix),
            provenance,
        }
    }

    pub fn smooth(matrix: SmoothEctMatrix, provenance: Provenance) -> Self {
        Archive {
            body: ArchiveBody::Smooth(matrix),
            provenance,
        }
    }

    fn parts(&self) -> (&DirectionSet, &ThresholdGrid, Array2<f64>) {
        match &self.body {
            ArchiveBody::Exact(m) => (&m.directions, &m.thresholds, m.values.mapv(|v| v as f64)),
            ArchiveBody::Smooth(m) => (&m.directions, &m.thresholds, m.values.clone()),
        }
    }

    pub fn to_text(&self) -> String {
        let (directions, grid, values) = self.parts();
        let mut out = String::new();
        let float = |x: f64| format!("{x:?}");
        let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");

        writeln!(out, "{ARCHIVE_HEADER}").unwrap();
        match &self.body {
            ArchiveBody::Exact(_) => writeln!(out, "kind exact").unwrap(),
            ArchiveBody::Smooth(m) => {
                writeln!(out, "kind smooth").unwrap();
                writeln!(out, "lambda {}", float(m.lambda)).unwrap();
                let counts = join(&mut m.source_counts.iter().map(usize::to_string));
                writeln!(out, "source_counts {counts}").unwrap();
            }
        }
        writeln!(out, "strategy {}", grid.strategy().as_str()).unwrap();
        writeln!(out, "shape {} {}", values.nrows(), values.ncols()).unwrap();
        writeln!(out, "dim {}", directions.dim()).unwrap();
        match self.provenance.seed {
            Some(seed) => writeln!(out, "seed {seed}").unwrap(),
            None => writeln!(out, "seed none").unwrap(),
        }
        writeln!(
            out,
            "config {}",
            self.provenance.config_hash.as_deref().unwrap_or("none")
        )
        .unwrap();

        match directions.angles() {
            Some(angles) => {
                writeln!(out, "directions angles").unwrap();
                for &a in angles {
                    writeln!(out, "a {}", float(a)).unwrap();
                }
            }
            None => {
                writeln!(out, "directions vectors").unwrap();
                for row in directions.vectors().rows() {
                    writeln!(out, "w {}", join(&mut row.iter().map(|&x| float(x)))).unwrap();
                }
            }
        }

        writeln!(out, "thresholds").unwrap();
        match grid {
            ThresholdGrid::Global(t) => {
                writeln!(out, "t {}", join(&mut t.iter().map(|&x| float(x)))).unwrap();
            }
            ThresholdGrid::PerDirection { grids, degenerate } => {
                for (g, &flat) in grids.iter().zip(degenerate) {
                    let tag = if flat { "flat" } else { "t" };
                    writeln!(out, "{tag} {}", join(&mut g.iter().map(|&x| float(x)))).unwrap();
                }
            }
        }

        writeln!(out, "values").unwrap();
        let exact = matches!(self.body, ArchiveBody::Exact(_));
        for row in values.rows() {
            let line = join(&mut row.iter().map(|&x| if exact { format_value(x) } else { float(x) }));
            writeln!(out, "{line}").unwrap();
        }
        writeln!(out, "end").unwrap();
        out
    }

    pub fn from_text(text: &str) -> std::result::Result<Self, (usize, String)> {
        Parser::new(text).archive()
    }
}

pub fn write_archive(path: impl AsRef<Path>, archive: &Archive) -> Result<()> {
    write_atomic(path.as_ref(), archive.to_text().as_bytes())
}

pub fn read_archive(path: impl AsRef<Path>) -> Result<Archive> {
    let path = path.as_ref();
    let text = read_text(path)?;
    Archive::from_text(&text).map_err(|(line, message)| EctError::parse(path, line, message))
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

type Parsed<T> = std::result::Result<T, (usize, String)>;

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            lines: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    fn next_line(&mut self) -> Parsed<(usize, &'a str)> {
        match self.lines.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok((i + 1, line))
            }
            None => Err((self.last + 1, "unexpected end of archive".into())),
        }
    }

    /// Next line, which must start with `key`; returns the rest.
    fn field(&mut self, key: &str) -> Parsed<(usize, &'a str)> {
        let (n, line) = self.next_line()?;
        let mut split = line.splitn(2, ' ');
        if split.next() != Some(key) {
            return Err((n, format!("expected `{key}`, found {line:?}")));
        }
        Ok((n, split.next().unwrap_or("").trim()))
    }

    fn archive(mut self) -> Parsed<Archive> {
        let (n, header) = self.next_line()?;
        if header != ARCHIVE_HEADER {
            return Err((n, format!("expected `{ARCHIVE_HEADER}` header, found {header:?}")));
        }
        let (n, kind) = self.field("kind")?;
        let smooth = match kind {
            "exact" => None,
            "smooth" => {
                let (ln, lambda) = self.field("lambda")?;
                let lambda = float(ln, lambda)?;
                let (ln, counts) = self.field("source_counts")?;
                let counts = counts
                    .split_whitespace()
                    .map(|c| c.parse::<usize>().map_err(|_| (ln, format!("invalid count {c:?}"))))
                    .collect::<Parsed<Vec<_>>>()?;
                Some((lambda, counts))
            }
            other => return Err((n, format!("unknown kind {other:?}"))),
        };
        let (n, strategy) = self.field("strategy")?;
        let strategy: Strategy = strategy.parse().map_err(|e: EctError| (n, e.to_string()))?;
        let (n, shape) = self.field("shape")?;
        let shape: Vec<usize> = shape
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| (n, format!("invalid shape {s:?}"))))
            .collect::<Parsed<_>>()?;
        let [rows, cols] = shape[..] else {
            return Err((n, "shape needs two numbers".into()));
        };
        let (n, dim) = self.field("dim")?;
        let dim: usize = dim.parse().map_err(|_| (n, format!("invalid dim {dim:?}")))?;
        let (n, seed) = self.field("seed")?;
        let seed = match seed {
            "none" => None,
            s => Some(s.parse::<u64>().map_err(|_| (n, format!("invalid seed {s:?}")))?),
        };
        let (_, config) = self.field("config")?;
        let config_hash = (config != "none").then(|| config.to_string());

        let (n, mode) = self.field("directions")?;
        let directions = match mode {
            "angles" => {
                let mut angles = Vec::with_capacity(cols);
                for _ in 0..cols {
                    let (ln, a) = self.field("a")?;
                    angles.push(float(ln, a)?);
                }
                DirectionSet::from_angles(&angles).map_err(|e| (n, e.to_string()))?
            }
            "vectors" => {
                let mut vectors = Array2::zeros((cols, dim));
                for j in 0..cols {
                    let (ln, w) = self.field("w")?;
                    let xs = floats(ln, w)?;
                    if xs.len() != dim {
                        return Err((ln, format!("expected {dim} components, found {}", xs.len())));
                    }
                    for (c, x) in xs.into_iter().enumerate() {
                        vectors[[j, c]] = x;
                    }
                }
                DirectionSet::from_stored(vectors, None).map_err(|e| (n, e.to_string()))?
            }
            other => return Err((n, format!("unknown direction mode {other:?}"))),
        };

        let (n, _) = self.field("thresholds")?;
        let grid = match strategy {
            Strategy::Global => {
                let (ln, t) = self.field("t")?;
                ThresholdGrid::global(floats(ln, t)?).map_err(|e| (ln, e.to_string()))?
            }
            Strategy::PerDirection => {
                let mut grids = Vec::with_capacity(cols);
                let mut degenerate = Vec::with_capacity(cols);
                for _ in 0..cols {
                    let (ln, line) = self.next_line()?;
                    let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
                    match tag {
                        "t" => degenerate.push(false),
                        "flat" => degenerate.push(true),
                        _ => return Err((ln, format!("expected `t` or `flat`, found {line:?}"))),
                    }
                    grids.push(floats(ln, rest)?);
                }
                ThresholdGrid::per_direction(grids, degenerate).map_err(|e| (n, e.to_string()))?
            }
        };
        if grid.l() != rows {
            return Err((n, format!("{} thresholds for {rows} rows", grid.l())));
        }

        let (_, _) = self.field("values")?;
        let mut values = Array2::zeros((rows, cols));
        for i in 0..rows {
            let (ln, line) = self.next_line()?;
            let xs = floats(ln, line)?;
            if xs.len() != cols {
                return Err((ln, format!("expected {cols} values, found {}", xs.len())));
            }
            for (j, x) in xs.into_iter().enumerate() {
                values[[i, j]] = x;
            }
        }
        let (n, end) = self.next_line()?;
        if end != "end" {
            return Err((n, format!("expected `end`, found {end:?}")));
        }

        let provenance = Provenance { seed, config_hash };
        let body = match smooth {
            Some((lambda, source_counts)) => ArchiveBody::Smooth(SmoothEctMatrix {
                values,
                lambda,
                directions,
                thresholds: grid,
                source_counts,
            }),
            None => {
                if values.iter().any(|v| v.fract() != 0.0) {
                    return Err((n, "exact archive holds non-integer values".into()));
                }
                ArchiveBody::Exact(EctMatrix {
                    values: values.mapv(|v| v as i64),
                    directions,
                    thresholds: grid,
                })
            }
        };
        Ok(Archive { body, provenance })
    }
}

fn float(line: usize, s: &str) -> Parsed<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or((line, format!("invalid number {s:?}")))
}

fn floats(line: usize, s: &str) -> Parsed<Vec<f64>> {
    s.split_whitespace().map(|t| float(line, t)).collect()
}
