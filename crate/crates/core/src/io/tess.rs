//! Reader for the Neper `.tess` tessellation format (versions 2.x to 4.x).
//!
//! Only the geometric sections are interpreted: `**vertex`, `**edge`,
//! `**face`, `**polyhedron` and `**domain`. Other sections are skipped with a
//! logged notice.

use std::collections::HashMap;
use std::path::Path;

use crate::complex::RawComplex;
use crate::error::{Error, Result};

/// A face record: vertex cycle and signed edge list, both as dense indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TessFace {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, i8)>,
}

/// Parsed tessellation with dense 0-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TessellationFile {
    pub version: String,
    pub nodes: Vec<[f64; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<TessFace>,
    /// Signed face lists.
    pub polyhedra: Vec<Vec<(usize, i8)>>,
    /// Domain type from `**domain *general`, e.g. `cube`.
    pub domain: String,
    /// Original ids, indexed like the dense arrays.
    pub node_ids: Vec<i64>,
    pub edge_ids: Vec<i64>,
    pub face_ids: Vec<i64>,
    pub polyhedron_ids: Vec<i64>,
}

impl TessellationFile {
    /// Axis-aligned bounding box of the vertices.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.nodes {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    pub fn to_raw(&self) -> RawComplex {
        RawComplex {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            faces: self.faces.iter().map(|f| f.vertices.clone()).collect(),
            polyhedra: self
                .polyhedra
                .iter()
                .map(|p| p.iter().map(|&(f, _)| f).collect())
                .collect(),
        }
    }
}

struct Tokens<'a> {
    name: &'a str,
    toks: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(name: &'a str, text: &'a str) -> Self {
        let toks: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        let last_line = text.lines().count().max(1);
        Tokens {
            name,
            toks,
            pos: 0,
            last_line,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::format(self.name, line, msg)
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.toks.get(self.pos).copied()
    }

    fn line(&self) -> usize {
        self.peek().map_or(self.last_line, |t| t.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let t = self
            .toks
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.err(self.last_line, format!("unexpected end of file while reading {what}")))?;
        if t.1.starts_with('*') {
            return Err(self.err(t.0, format!("expected {what}, found section marker {}", t.1)));
        }
        self.pos += 1;
        Ok(t)
    }

    fn int(&mut self, what: &str) -> Result<i64> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| self.err(line, format!("expected integer {what}, found '{t}'")))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| self.err(line, format!("expected count {what}, found '{t}'")))
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let (line, t) = self.next(what)?;
        let v: f64 = t
            .parse()
            .map_err(|_| self.err(line, format!("expected number {what}, found '{t}'")))?;
        if !v.is_finite() {
            return Err(self.err(line, format!("non-finite {what}")));
        }
        Ok(v)
    }

    /// Remaining tokens on the line of the last consumed token.
    fn rest_of_line(&mut self) {
        let line = self.toks[self.pos - 1].0;
        while matches!(self.peek(), Some((l, t)) if l == line && !t.starts_with('*')) {
            self.pos += 1;
        }
    }

    /// Skips to the next `**section` or `***end` marker.
    fn skip_section(&mut self) {
        while let Some((_, t)) = self.peek() {
            if t.starts_with("**") {
                break;
            }
            self.pos += 1;
        }
    }
}

fn resolve(map: &HashMap<i64, usize>, id: i64, kind: &str, tk: &Tokens, line: usize) -> Result<usize> {
    map.get(&id)
        .copied()
        .ok_or_else(|| tk.err(line, format!("reference to unknown {kind} {id}")))
}

fn insert_id(map: &mut HashMap<i64, usize>, ids: &mut Vec<i64>, id: i64, kind: &str, tk: &Tokens, line: usize) -> Result<()> {
    if map.insert(id, ids.len()).is_some() {
        return Err(tk.err(line, format!("duplicate {kind} id {id}")));
    }
    ids.push(id);
    Ok(())
}

fn sign_of(id: i64) -> (i64, i8) {
    if id < 0 {
        (-id, -1)
    } else {
        (id, 1)
    }
}

/// Parses `.tess` text; `name` labels error messages.
pub fn parse_tess_str(name: &str, text: &str) -> Result<TessellationFile> {
    let mut tk = Tokens::new(name, text);
    let mut version = None;
    let mut domain = None;
    let (mut nodes, mut node_ids, mut node_map) = (Vec::new(), Vec::new(), HashMap::new());
    let (mut edges, mut edge_ids, mut edge_map) = (Vec::new(), Vec::new(), HashMap::new());
    let (mut faces, mut face_ids, mut face_map) = (Vec::new(), Vec::new(), HashMap::new());
    let (mut polyhedra, mut poly_ids, mut poly_map) = (Vec::new(), Vec::new(), HashMap::new());
    let mut seen = [false; 4];
    let mut ended = false;

    match tk.peek() {
        Some((_, "***tess")) => tk.pos += 1,
        Some((line, t)) => return Err(tk.err(line, format!("expected ***tess header, found '{t}'"))),
        None => return Err(tk.err(1, "empty file")),
    }
    while let Some((line, marker)) = tk.peek() {
        tk.pos += 1;
        match marker {
            "***end" => {
                ended = true;
                break;
            }
            "**format" => {
                let (vline, v) = tk.next("format version")?;
                let major = v.split('.').next().and_then(|m| m.parse::<u32>().ok());
                if !matches!(major, Some(2..=4)) {
                    return Err(Error::Unsupported(format!("{name}:{vline}: .tess format version {v}")));
                }
                version = Some(v.to_string());
                tk.skip_section();
            }
            "**vertex" => {
                let n = tk.count("vertex count")?;
                for _ in 0..n {
                    let l = tk.line();
                    let id = tk.int("vertex id")?;
                    let p = [tk.real("x")?, tk.real("y")?, tk.real("z")?];
                    tk.rest_of_line();
                    insert_id(&mut node_map, &mut node_ids, id, "vertex", &tk, l)?;
                    nodes.push(p);
                }
                seen[0] = true;
                expect_marker(&tk, "**vertex", n)?;
            }
            "**edge" => {
                let n = tk.count("edge count")?;
                for _ in 0..n {
                    let l = tk.line();
                    let id = tk.int("edge id")?;
                    let a = tk.int("edge vertex")?;
                    let b = tk.int("edge vertex")?;
                    tk.rest_of_line();
                    insert_id(&mut edge_map, &mut edge_ids, id, "edge", &tk, l)?;
                    let a = resolve(&node_map, a, "vertex", &tk, l)?;
                    let b = resolve(&node_map, b, "vertex", &tk, l)?;
                    if a == b {
                        return Err(tk.err(l, format!("edge {id} is a loop")));
                    }
                    edges.push([a, b]);
                }
                seen[1] = true;
                expect_marker(&tk, "**edge", n)?;
            }
            "**face" => {
                let n = tk.count("face count")?;
                for _ in 0..n {
                    let l = tk.line();
                    let id = tk.int("face id")?;
                    let nv = tk.count("face vertex count")?;
                    let mut vertices = Vec::with_capacity(nv);
                    for _ in 0..nv {
                        let v = tk.int("face vertex")?;
                        vertices.push(resolve(&node_map, v, "vertex", &tk, l)?);
                    }
                    let ne = tk.count("face edge count")?;
                    let mut fedges = Vec::with_capacity(ne);
                    for _ in 0..ne {
                        let (e, s) = sign_of(tk.int("face edge")?);
                        fedges.push((resolve(&edge_map, e, "edge", &tk, l)?, s));
                    }
                    for what in ["face equation d", "face equation a", "face equation b", "face equation c"] {
                        tk.real(what)?;
                    }
                    tk.int("face state")?;
                    tk.int("face point")?;
                    for what in ["face point x", "face point y", "face point z"] {
                        tk.real(what)?;
                    }
                    insert_id(&mut face_map, &mut face_ids, id, "face", &tk, l)?;
                    check_cycle(&tk, l, id, &vertices, &fedges, &edges)?;
                    faces.push(TessFace {
                        vertices,
                        edges: fedges,
                    });
                }
                seen[2] = true;
                expect_marker(&tk, "**face", n)?;
            }
            "**polyhedron" => {
                let n = tk.count("polyhedron count")?;
                for _ in 0..n {
                    let l = tk.line();
                    let id = tk.int("polyhedron id")?;
                    let nf = tk.count("polyhedron face count")?;
                    let mut pf = Vec::with_capacity(nf);
                    for _ in 0..nf {
                        let (f, s) = sign_of(tk.int("polyhedron face")?);
                        pf.push((resolve(&face_map, f, "face", &tk, l)?, s));
                    }
                    insert_id(&mut poly_map, &mut poly_ids, id, "polyhedron", &tk, l)?;
                    polyhedra.push(pf);
                }
                seen[3] = true;
                expect_marker(&tk, "**polyhedron", n)?;
            }
            "**domain" => {
                while let Some((_, t)) = tk.peek() {
                    if t.starts_with("**") {
                        break;
                    }
                    tk.pos += 1;
                    if t == "*general" {
                        domain = Some(tk.next("domain type")?.1.to_string());
                    }
                }
            }
            m if m.starts_with("**") => {
                log::info!("{name}:{line}: skipping section {m}");
                tk.skip_section();
            }
            t => return Err(tk.err(line, format!("unexpected token '{t}' outside a section"))),
        }
    }
    if !ended {
        return Err(tk.err(tk.last_line, "missing ***end (file truncated?)"));
    }
    let version = version.ok_or_else(|| tk.err(1, "missing section **format"))?;
    for (i, s) in ["**vertex", "**edge", "**face", "**polyhedron"].iter().enumerate() {
        if !seen[i] {
            return Err(tk.err(tk.last_line, format!("missing section {s}")));
        }
    }
    let domain = domain.ok_or_else(|| tk.err(tk.last_line, "missing section **domain"))?;
    Ok(TessellationFile {
        version,
        nodes,
        edges,
        faces,
        polyhedra,
        domain,
        node_ids,
        edge_ids,
        face_ids,
        polyhedron_ids: poly_ids,
    })
}

fn expect_marker(tk: &Tokens, section: &str, n: usize) -> Result<()> {
    match tk.peek() {
        Some((_, t)) if t.starts_with('*') => Ok(()),
        Some((line, t)) => Err(tk.err(
            line,
            format!("{section} declares {n} records but more data follows ('{t}')"),
        )),
        None => Ok(()),
    }
}

fn check_cycle(tk: &Tokens, line: usize, id: i64, vs: &[usize], fe: &[(usize, i8)], edges: &[[usize; 2]]) -> Result<()> {
    if vs.len() < 3 || vs.len() != fe.len() {
        return Err(tk.err(
            line,
            format!("face {id} has {} vertices and {} edges", vs.len(), fe.len()),
        ));
    }
    for i in 0..vs.len() {
        let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
        let found = fe.iter().any(|&(e, _)| {
            let [p, q] = edges[e];
            (p, q) == (a, b) || (p, q) == (b, a)
        });
        if !found {
            return Err(tk.err(line, format!("face {id} cycle is not closed by its edges")));
        }
    }
    Ok(())
}

/// Reads and parses a `.tess` file.
pub fn parse_tess(path: impl AsRef<Path>) -> Result<TessellationFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tess_str(&path.display().to_string(), &text)
}
