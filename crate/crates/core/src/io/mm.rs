//! Matrix Market coordinate format.
//!
//! Writes `%%MatrixMarket matrix coordinate real general` with 1-based
//! indices and shortest round-trip decimals, plus one `%formflow` comment
//! carrying the cochain spaces and physical unit so a read restores the
//! operator exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::{ComplexId, OperatorMatrix, Space};
use crate::units::PhysDim;

fn complex_name(c: ComplexId) -> &'static str {
    match c {
        ComplexId::Material => "material",
        ComplexId::Forman => "forman",
        ComplexId::Reduced => "reduced",
    }
}

fn parse_complex(s: &str) -> Option<ComplexId> {
    match s {
        "material" => Some(ComplexId::Material),
        "forman" => Some(ComplexId::Forman),
        "reduced" => Some(ComplexId::Reduced),
        _ => None,
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Serializes an operator to Matrix Market text.
pub fn to_matrix_market(a: &OperatorMatrix<f64>) -> String {
    let (r, c, u) = (a.row_space(), a.col_space(), a.unit());
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(
        s,
        "%formflow rows={}:{} cols={}:{} unit={},{},{}",
        complex_name(r.complex),
        r.dim,
        complex_name(c.complex),
        c.dim,
        u.mass,
        u.length,
        u.time
    );
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {}", i + 1, j + 1, format_f64(v));
    }
    s
}

pub fn write_matrix_market(path: impl AsRef<Path>, a: &OperatorMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(to_matrix_market(a).as_bytes()).map_err(|e| Error::io(path, e))
}

fn parse_space(tag: &str) -> Option<Space> {
    let (c, d) = tag.split_once(':')?;
    Some(Space::new(parse_complex(c)?, d.parse().ok()?))
}

fn parse_meta(line: &str) -> Option<(Space, Space, PhysDim)> {
    let mut rows = None;
    let mut cols = None;
    let mut unit = None;
    for field in line.trim_start_matches("%formflow").split_whitespace() {
        let (k, v) = field.split_once('=')?;
        match k {
            "rows" => rows = parse_space(v),
            "cols" => cols = parse_space(v),
            "unit" => {
                let d: Vec<i8> = v.split(',').map(|x| x.parse().ok()).collect::<Option<_>>()?;
                if d.len() != 3 {
                    return None;
                }
                unit = Some(PhysDim::new(d[0], d[1], d[2]));
            }
            _ => {}
        }
    }
    Some((rows?, cols?, unit?))
}

/// Parses Matrix Market text (`real` or `integer`, `general` or `symmetric`).
/// Without a `%formflow` comment the spaces default to reduced 0-cochains and
/// the operator is dimensionless.
pub fn parse_matrix_market(name: &str, text: &str) -> Result<OperatorMatrix<f64>> {
    let err = |line: usize, msg: String| Error::format(name, line, msg);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let h: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(err(1, format!("unsupported header '{header}'")));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(Error::Unsupported(format!("{name}: Matrix Market field '{}'", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Unsupported(format!("{name}: Matrix Market symmetry '{other}'"))),
    };
    let default_space = Space::new(ComplexId::Reduced, 0);
    let mut meta = (default_space, default_space, PhysDim::DIMENSIONLESS);
    let mut size = None;
    let mut trip = Vec::new();
    let mut last = 1;
    for (ln, line) in lines {
        last = ln;
        let t = line.trim();
        if t.starts_with("%formflow") {
            meta = parse_meta(t).ok_or_else(|| err(ln, "malformed %formflow comment".into()))?;
            continue;
        }
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(err(ln, "expected 'rows cols entries'".into()));
                }
                let n: Vec<usize> = f
                    .iter()
                    .map(|x| x.parse().map_err(|_| err(ln, format!("bad size field '{x}'"))))
                    .collect::<Result<_>>()?;
                size = Some((n[0], n[1], n[2]));
                trip.reserve(n[2]);
            }
            Some((nr, nc, nnz)) => {
                if f.len() != 3 {
                    return Err(err(ln, "expected 'row col value'".into()));
                }
                if trip.len() >= nnz {
                    return Err(err(ln, format!("more than the declared {nnz} entries")));
                }
                let i: usize = f[0].parse().map_err(|_| err(ln, format!("bad row '{}'", f[0])))?;
                let j: usize = f[1].parse().map_err(|_| err(ln, format!("bad column '{}'", f[1])))?;
                let v: f64 = f[2].parse().map_err(|_| err(ln, format!("bad value '{}'", f[2])))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(err(ln, format!("entry ({i}, {j}) outside {nr}x{nc}")));
                }
                trip.push((i - 1, j - 1, v));
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or_else(|| err(last, "missing size line".into()))?;
    if trip.len() != nnz {
        return Err(err(last, format!("declared {nnz} entries, found {}", trip.len())));
    }
    if symmetric {
        let mirrored: Vec<_> = trip.iter().filter(|t| t.0 != t.1).map(|&(i, j, v)| (j, i, v)).collect();
        trip.extend(mirrored);
    }
    OperatorMatrix::from_triplets((meta.0, nr), (meta.1, nc), trip, meta.2)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<OperatorMatrix<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&path.display().to_string(), &text)
}
