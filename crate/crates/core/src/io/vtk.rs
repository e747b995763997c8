//! Legacy ASCII VTK export of point fields.
//!
//! Points become an `UNSTRUCTURED_GRID` of `VTK_VERTEX` cells (type 1) with
//! one `POINT_DATA` scalar array per field.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::mm::format_f64;

/// Renders points and named scalar fields as a legacy VTK 3.0 file.
pub fn to_vtk_points(title: &str, points: &[[f64; 3]], fields: &[(&str, &[f64])]) -> Result<String> {
    let n = points.len();
    for (name, values) in fields {
        if values.len() != n {
            return Err(Error::Validation(format!(
                "field '{name}' has {} values for {n} points",
                values.len()
            )));
        }
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Validation(format!("VTK array name '{name}' must be a non-empty single token")));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or("").chars().take(255).collect::<String>());
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for p in points {
        let _ = writeln!(s, "{} {} {}", format_f64(p[0]), format_f64(p[1]), format_f64(p[2]));
    }
    let _ = writeln!(s, "CELLS {n} {}", 2 * n);
    for i in 0..n {
        let _ = writeln!(s, "1 {i}");
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        let _ = writeln!(s, "1");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {n}");
        for (name, values) in fields {
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for v in *values {
                let _ = writeln!(s, "{}", format_f64(*v));
            }
        }
    }
    Ok(s)
}
