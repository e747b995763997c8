//! Test-only `.tess` writer, used to generate fixtures from built complexes.
#![allow(dead_code)]

use std::fmt::Write;

use formflow::{CellComplex64, CellId};

/// Writes `m` in the Neper 3.4 layout with 1-based ids offset by `id_offset`.
pub fn write_tess(m: &CellComplex64, id_offset: i64) -> String {
    let id = |i: usize| i as i64 + 1 + id_offset;
    let signed = |i: usize, s: i8| if s < 0 { -id(i) } else { id(i) };
    let mut s = String::from("***tess\n **format\n   3.4\n **general\n   3 standard\n");
    let _ = writeln!(s, " **cell\n   {}\n  *id", m.count(3));
    for c in 0..m.count(3) {
        let _ = write!(s, " {}", id(c));
    }
    let _ = writeln!(s, "\n **vertex\n {}", m.count(0));
    for (v, p) in m.node_coords().iter().enumerate() {
        let _ = writeln!(s, "  {} {:.17e} {:.17e} {:.17e} 0", id(v), p[0], p[1], p[2]);
    }
    let _ = writeln!(s, " **edge\n {}", m.count(1));
    for e in 0..m.count(1) {
        let ends: Vec<usize> = m.faces_of(CellId::new(1, e)).iter().map(|&(v, _)| v).collect();
        let _ = writeln!(s, "  {} {} {} 0", id(e), id(ends[0]), id(ends[1]));
    }
    let _ = writeln!(s, " **face\n {}", m.count(2));
    for f in 0..m.count(2) {
        let cyc = m.face_cycle(f);
        let _ = write!(s, "  {} {}", id(f), cyc.len());
        for &v in cyc {
            let _ = write!(s, " {}", id(v));
        }
        let edges = m.faces_of(CellId::new(2, f));
        let _ = write!(s, "\n    {}", edges.len());
        for &(e, sg) in edges {
            let _ = write!(s, " {}", signed(e, sg));
        }
        let n = m.face_normal(f);
        let _ = writeln!(s, "\n    0.0 {} {} {}\n    0 0 0.0 0.0 0.0", n[0], n[1], n[2]);
    }
    let _ = writeln!(s, " **polyhedron\n {}", m.count(3));
    for c in 0..m.count(3) {
        let faces = m.faces_of(CellId::new(3, c));
        let _ = write!(s, "  {} {}", id(c), faces.len());
        for &(f, sg) in faces {
            let _ = write!(s, " {}", signed(f, sg));
        }
        s.push('\n');
    }
    s.push_str(" **domain\n  *general\n   cube\n***end\n");
    s
}
