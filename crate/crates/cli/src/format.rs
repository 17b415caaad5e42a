//! The line-delimited operator/curve file format.
//!
//! Matrix files:
//!
//! ```text
//! dim=2 kind=density
//! 0.5 0
//! 0 0
//! 0 0
//! 0.5 0
//! ```
//!
//! One header line, then `dim²` lines of `re im` in row-major order
//! (vectors carry `dim·dim_right` lines, with `dim_right=1` unless the
//! header says otherwise). Curve files start with a `grid=` header and
//! separate blocks with `---`:
//!
//! ```text
//! grid=0 0.25 0.5 0.75 1
//! dim=2 kind=density
//! ...
//! ---
//! dim=2 kind=density
//! ...
//! ```
//!
//! Values are written back with the shortest representation that parses to
//! the same bits, so files round-trip losslessly. Blank lines and lines
//! starting with `#` are ignored.

use bures_core::{Complex64, ComplexMatrix, DMatrix, DVector, DensityOperator, PositiveOperator};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Structure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Density,
    Positive,
    Amplitude,
    Vector,
}

impl MatrixKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Density => "density",
            MatrixKind::Positive => "positive",
            MatrixKind::Amplitude => "amplitude",
            MatrixKind::Vector => "vector",
        }
    }

    fn parse(s: &str, line: usize) -> Result<Self, ParseError> {
        match s {
            "density" => Ok(MatrixKind::Density),
            "positive" => Ok(MatrixKind::Positive),
            "amplitude" => Ok(MatrixKind::Amplitude),
            "vector" => Ok(MatrixKind::Vector),
            other => Err(ParseError::Syntax {
                line,
                message: format!("unknown kind '{other}' (expected density, positive, amplitude or vector)"),
            }),
        }
    }
}

/// A parsed operator block: `dim², or dim·dim_right for vectors, complex
/// entries in row-major order`.
#[derive(Clone, Debug)]
pub struct MatrixFile {
    pub dim: usize,
    pub dim_right: usize,
    pub kind: MatrixKind,
    pub entries: Vec<Complex64>,
}

impl MatrixFile {
    pub fn expected_entries(dim: usize, dim_right: usize, kind: MatrixKind) -> usize {
        match kind {
            MatrixKind::Vector => dim * dim_right,
            _ => dim * dim,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, bures_core::CoreError> {
        ComplexMatrix::from_row_major(self.dim, self.dim, self.entries.clone())
    }

    pub fn to_density(&self) -> Result<DensityOperator, bures_core::CoreError> {
        DensityOperator::from_matrix(self.to_matrix()?.into_matrix())
    }

    pub fn to_positive(&self) -> Result<PositiveOperator, bures_core::CoreError> {
        PositiveOperator::from_matrix(self.to_matrix()?.into_matrix())
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_vec(self.entries.clone())
    }
}

/// A parsed curve: one grid, one operator block per grid point.
#[derive(Clone, Debug)]
pub struct CurveFile {
    pub grid: Vec<f64>,
    pub blocks: Vec<MatrixFile>,
}

// (line number, content) with comments and blanks removed
fn meaningful_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse::<f64>().map_err(|_| ParseError::Syntax {
        line,
        message: format!("'{tok}' is not a number"),
    })
}

fn parse_header(line_no: usize, line: &str) -> Result<(usize, usize, MatrixKind), ParseError> {
    let mut dim = None;
    let mut dim_right = 1usize;
    let mut kind = None;
    for field in line.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| ParseError::Syntax {
            line: line_no,
            message: format!("expected key=value, got '{field}'"),
        })?;
        match key {
            "dim" => {
                dim = Some(value.parse::<usize>().map_err(|_| ParseError::Syntax {
                    line: line_no,
                    message: format!("bad dim '{value}'"),
                })?)
            }
            "dim_right" => {
                dim_right = value.parse::<usize>().map_err(|_| ParseError::Syntax {
                    line: line_no,
                    message: format!("bad dim_right '{value}'"),
                })?
            }
            "kind" => kind = Some(MatrixKind::parse(value, line_no)?),
            other => {
                return Err(ParseError::Syntax {
                    line: line_no,
                    message: format!("unknown header field '{other}'"),
                })
            }
        }
    }
    let dim = dim.ok_or(ParseError::Syntax { line: line_no, message: "header missing dim=".into() })?;
    let kind =
        kind.ok_or(ParseError::Syntax { line: line_no, message: "header missing kind=".into() })?;
    if dim == 0 {
        return Err(ParseError::Syntax { line: line_no, message: "dim must be positive".into() });
    }
    Ok((dim, dim_right, kind))
}

fn parse_block(lines: &[(usize, &str)]) -> Result<MatrixFile, ParseError> {
    let Some(((header_no, header), rest)) = lines.split_first() else {
        return Err(ParseError::Structure("empty block".into()));
    };
    let (dim, dim_right, kind) = parse_header(*header_no, header)?;
    let expected = MatrixFile::expected_entries(dim, dim_right, kind);
    if rest.len() != expected {
        return Err(ParseError::Structure(format!(
            "block at line {header_no}: expected {expected} entry lines, got {}",
            rest.len()
        )));
    }
    let mut entries = Vec::with_capacity(expected);
    for (line_no, l) in rest {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(ParseError::Syntax {
                line: *line_no,
                message: format!("expected 're im', got '{l}'"),
            });
        }
        entries.push(Complex64::new(parse_f64(toks[0], *line_no)?, parse_f64(toks[1], *line_no)?));
    }
    Ok(MatrixFile { dim, dim_right, kind, entries })
}

/// Parses a single-operator file.
pub fn parse_matrix_file(text: &str) -> Result<MatrixFile, ParseError> {
    let lines = meaningful_lines(text);
    parse_block(&lines)
}

/// Parses a curve file: `grid=` header, then `---`-separated blocks, one
/// per grid point.
pub fn parse_curve_file(text: &str) -> Result<CurveFile, ParseError> {
    let lines = meaningful_lines(text);
    let Some(((grid_no, grid_line), rest)) = lines.split_first() else {
        return Err(ParseError::Structure("empty curve file".into()));
    };
    let Some(grid_values) = grid_line.strip_prefix("grid=") else {
        return Err(ParseError::Syntax {
            line: *grid_no,
            message: "curve files must start with a grid= header".into(),
        });
    };
    let mut grid = Vec::new();
    for tok in grid_values.split_whitespace() {
        grid.push(parse_f64(tok, *grid_no)?);
    }
    if grid.len() < 2 {
        return Err(ParseError::Structure("grid needs at least two points".into()));
    }

    let mut blocks = Vec::new();
    let mut current: Vec<(usize, &str)> = Vec::new();
    for (no, l) in rest {
        if *l == "---" {
            blocks.push(parse_block(&current)?);
            current.clear();
        } else {
            current.push((*no, l));
        }
    }
    if !current.is_empty() {
        blocks.push(parse_block(&current)?);
    }
    if blocks.len() != grid.len() {
        return Err(ParseError::Structure(format!(
            "grid has {} points but the file has {} blocks",
            grid.len(),
            blocks.len()
        )));
    }
    let dim = blocks[0].dim;
    for b in &blocks {
        if b.dim != dim || b.kind != blocks[0].kind {
            return Err(ParseError::Structure("curve blocks must share dim and kind".into()));
        }
    }
    Ok(CurveFile { grid, blocks })
}

#[cfg(test)]
fn push_entries(out: &mut String, entries: &[Complex64]) {
    for z in entries {
        out.push_str(&format!("{} {}\n", z.re, z.im));
    }
}

/// Serializes one operator block (lossless round trip).
#[cfg(test)]
pub fn write_matrix_file(file: &MatrixFile) -> String {
    let mut out = String::new();
    if file.kind == MatrixKind::Vector && file.dim_right != 1 {
        out.push_str(&format!(
            "dim={} kind={} dim_right={}\n",
            file.dim,
            file.kind.as_str(),
            file.dim_right
        ));
    } else {
        out.push_str(&format!("dim={} kind={}\n", file.dim, file.kind.as_str()));
    }
    push_entries(&mut out, &file.entries);
    out
}

/// Serializes a curve file.
#[cfg(test)]
pub fn write_curve_file(curve: &CurveFile) -> String {
    let mut out = String::from("grid=");
    for (i, s) in curve.grid.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{s}"));
    }
    out.push('\n');
    for (i, block) in curve.blocks.iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        out.push_str(&write_matrix_file(block));
    }
    out
}

/// Row-major entries of a matrix, for serialization.
pub fn matrix_entries(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips_a_density_file() {
        let text = "dim=2 kind=density\n0.5 0\n0 0\n0 0\n0.5 0\n";
        let parsed = parse_matrix_file(text).unwrap();
        assert_eq!(parsed.dim, 2);
        assert_eq!(parsed.kind, MatrixKind::Density);
        let rho = parsed.to_density().unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);

        let written = write_matrix_file(&parsed);
        let reparsed = parse_matrix_file(&written).unwrap();
        assert_eq!(parsed.entries, reparsed.entries);
    }

    #[test]
    fn round_trip_preserves_awkward_floats() {
        let entries = vec![
            Complex64::new(0.1 + 0.2, -1.0 / 3.0),
            Complex64::new(f64::MIN_POSITIVE, 1e300),
            Complex64::new(-0.0, 2.5e-17),
            Complex64::new(std::f64::consts::PI, -std::f64::consts::E),
        ];
        let file = MatrixFile { dim: 2, dim_right: 1, kind: MatrixKind::Amplitude, entries };
        let reparsed = parse_matrix_file(&write_matrix_file(&file)).unwrap();
        for (a, b) in file.entries.iter().zip(reparsed.entries.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_matrix_file("kind=density\n").is_err());
        assert!(parse_matrix_file("dim=2 kind=density\n1 0\n").is_err());
        assert!(parse_matrix_file("dim=2 kind=mystery\n1 0\n0 0\n0 0\n1 0\n").is_err());
        assert!(parse_matrix_file("dim=2 kind=density\n1 0\nx 0\n0 0\n0 0\n").is_err());
    }

    #[test]
    fn parses_a_curve_file() {
        let text = "\
# a two-point constant curve
grid=0 1
dim=2 kind=density
1 0
0 0
0 0
0 0
---
dim=2 kind=density
1 0
0 0
0 0
0 0
";
        let curve = parse_curve_file(text).unwrap();
        assert_eq!(curve.grid, vec![0.0, 1.0]);
        assert_eq!(curve.blocks.len(), 2);
        let round = parse_curve_file(&write_curve_file(&curve)).unwrap();
        assert_eq!(round.grid, curve.grid);
    }

    #[test]
    fn curve_block_count_must_match_grid() {
        let text = "grid=0 0.5 1\ndim=1 kind=density\n1 0\n---\ndim=1 kind=density\n1 0\n";
        assert!(matches!(parse_curve_file(text), Err(ParseError::Structure(_))));
    }

    #[test]
    fn vector_blocks_use_dim_right() {
        let text = "dim=2 kind=vector dim_right=2\n1 0\n0 0\n0 0\n1 0\n";
        let parsed = parse_matrix_file(text).unwrap();
        assert_eq!(parsed.entries.len(), 4);
        let round = parse_matrix_file(&write_matrix_file(&parsed)).unwrap();
        assert_eq!(round.dim_right, 2);
    }
}
