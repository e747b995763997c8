//! CSV tables: feature statistics, pressure fields, boundary flux reports and
//! permeability results.
//!
//! Floats are written with the shortest decimal that parses back exactly.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fabric::Feature;
use crate::io::mm::format_f64;

fn csv_err(name: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(name, io),
        kind => Error::format(name, line, format!("{kind:?}")),
    }
}

fn write_err(name: &str, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(name, io),
        kind => Error::format(name, 0, format!("{kind:?}")),
    }
}

/// Reads a two-column numeric CSV with the given header names.
fn read_pairs<R: Read>(name: &str, reader: R, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let h = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    if h.len() != 2 || h[0] != *header[0] || h[1] != *header[1] {
        return Err(Error::format(
            name,
            1,
            format!("expected header '{},{}', found '{}'", header[0], header[1], h.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != 2 {
            return Err(Error::format(name, line, format!("expected 2 fields, found {}", rec.len())));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(name, line, format!("'{s}' is not a finite number")))
        };
        out.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

/// Voluminous feature histogram: `volume_m3,frequency`.
pub fn parse_volume_frequency<R: Read>(name: &str, reader: R) -> Result<Vec<(f64, f64)>> {
    read_pairs(name, reader, ["volume_m3", "frequency"])
}

pub fn read_volume_frequency(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    parse_volume_frequency(&path.display().to_string(), open(path)?)
}

/// Expansive void CDF: `volume_m3,cumulative_probability`.
pub fn parse_volume_cdf<R: Read>(name: &str, reader: R) -> Result<Vec<(f64, f64)>> {
    read_pairs(name, reader, ["volume_m3", "cumulative_probability"])
}

pub fn read_volume_cdf(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    parse_volume_cdf(&path.display().to_string(), open(path)?)
}

pub const FEATURE_HEADER: [&str; 4] = ["volume_m3", "longest_m", "intermediate_m", "shortest_m"];

/// Measured voids with extents: `volume_m3,longest_m,intermediate_m,shortest_m`.
pub fn parse_features<R: Read>(name: &str, reader: R) -> Result<Vec<Feature>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let h = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    if h.iter().ne(FEATURE_HEADER) {
        return Err(Error::format(name, 1, format!("expected header '{}'", FEATURE_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != 4 {
            return Err(Error::format(name, line, format!("expected 4 fields, found {}", rec.len())));
        }
        let mut v = [0.0; 4];
        for (i, x) in v.iter_mut().enumerate() {
            *x = rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(name, line, format!("'{}' is not a finite number", &rec[i])))?;
        }
        out.push(Feature {
            volume: v[0],
            extents: [v[1], v[2], v[3]],
        });
    }
    Ok(out)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<Feature>> {
    let path = path.as_ref();
    parse_features(&path.display().to_string(), open(path)?)
}

/// One row of a pressure field export.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub cell_id: usize,
    pub point: [f64; 3],
    pub pressure: f64,
}

pub const FIELD_HEADER: [&str; 5] = ["cell_id", "x", "y", "z", "pressure"];

pub fn write_field<W: Write>(writer: W, rows: &[FieldRow]) -> Result<()> {
    let name = "pressure field";
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(FIELD_HEADER).map_err(|e| write_err(name, e))?;
    for r in rows {
        w.write_record([
            r.cell_id.to_string(),
            format_f64(r.point[0]),
            format_f64(r.point[1]),
            format_f64(r.point[2]),
            format_f64(r.pressure),
        ])
        .map_err(|e| write_err(name, e))?;
    }
    w.flush().map_err(|e| Error::io(name, e))
}

pub fn parse_field<R: Read>(name: &str, reader: R) -> Result<Vec<FieldRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let h = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    if h.iter().ne(FIELD_HEADER) {
        return Err(Error::format(name, 1, format!("expected header '{}'", FIELD_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |s: &str| Error::format(name, line, format!("bad field '{s}'"));
        if rec.len() != 5 {
            return Err(Error::format(name, line, format!("expected 5 fields, found {}", rec.len())));
        }
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(&rec[i]));
        out.push(FieldRow {
            cell_id: rec[0].parse().map_err(|_| bad(&rec[0]))?,
            point: [f(1)?, f(2)?, f(3)?],
            pressure: f(4)?,
        });
    }
    Ok(out)
}

/// Outward flux through one boundary 2-cell of the material complex.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxRow {
    pub face_id: usize,
    pub set: String,
    pub area: f64,
    pub outward_flux: f64,
}

pub const FLUX_HEADER: [&str; 4] = ["face_id", "set", "area_m2", "outward_flux_m3_per_s"];

pub fn write_flux_report<W: Write>(writer: W, rows: &[FluxRow]) -> Result<()> {
    let name = "flux report";
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(FLUX_HEADER).map_err(|e| write_err(name, e))?;
    for r in rows {
        w.write_record([r.face_id.to_string(), r.set.clone(), format_f64(r.area), format_f64(r.outward_flux)])
            .map_err(|e| write_err(name, e))?;
    }
    w.flush().map_err(|e| Error::io(name, e))
}

/// One permeability measurement. Failed realisations keep their identity
/// columns, leave the numeric columns empty and carry the error in `status`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub realisation: usize,
    pub direction: String,
    pub seed: u64,
    pub achieved_porosity: Option<f64>,
    pub q_m3_per_s: Option<f64>,
    pub k_cond: Option<f64>,
    pub k_m2: Option<f64>,
    pub residual: Option<f64>,
    pub wall_s: f64,
    pub status: String,
}

pub const RESULT_HEADER: [&str; 10] = [
    "realisation",
    "direction",
    "seed",
    "achieved_porosity",
    "Q_m3_per_s",
    "K_cond",
    "k_m2",
    "residual",
    "wall_s",
    "status",
];

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn write_results<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let name = "results";
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(RESULT_HEADER).map_err(|e| write_err(name, e))?;
    for r in rows {
        w.write_record([
            r.realisation.to_string(),
            r.direction.clone(),
            r.seed.to_string(),
            opt(r.achieved_porosity),
            opt(r.q_m3_per_s),
            opt(r.k_cond),
            opt(r.k_m2),
            opt(r.residual),
            format_f64(r.wall_s),
            r.status.clone(),
        ])
        .map_err(|e| write_err(name, e))?;
    }
    w.flush().map_err(|e| Error::io(name, e))
}

pub fn parse_results<R: Read>(name: &str, reader: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let h = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    if h.iter().ne(RESULT_HEADER) {
        return Err(Error::format(name, 1, format!("expected header '{}'", RESULT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != RESULT_HEADER.len() {
            return Err(Error::format(name, line, format!("expected 10 fields, found {}", rec.len())));
        }
        let bad = |i: usize| Error::format(name, line, format!("bad {} '{}'", RESULT_HEADER[i], &rec[i]));
        let o = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                rec[i].parse().map(Some).map_err(|_| bad(i))
            }
        };
        out.push(ResultRow {
            realisation: rec[0].parse().map_err(|_| bad(0))?,
            direction: rec[1].to_string(),
            seed: rec[2].parse().map_err(|_| bad(2))?,
            achieved_porosity: o(3)?,
            q_m3_per_s: o(4)?,
            k_cond: o(5)?,
            k_m2: o(6)?,
            residual: o(7)?,
            wall_s: rec[8].parse().map_err(|_| bad(8))?,
            status: rec[9].to_string(),
        });
    }
    Ok(out)
}

/// Writes `write` into a file, creating parent directories.
pub fn write_file(path: impl AsRef<Path>, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write(&mut buf)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
