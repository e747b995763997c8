//! The material cell complex M.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::scalar::{vec3, Real, Ring};
use crate::sparse::{ComplexId, OperatorMatrix, Space};
use crate::units::PhysDim;

/// Cells with a measure below this are rejected as degenerate.
pub const MIN_MEASURE: f64 = 1e-18;

/// A cell of M, addressed by dimension and dense per-dimension index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub dim: usize,
    pub index: usize,
}

impl CellId {
    pub const fn new(dim: usize, index: usize) -> Self {
        CellId { dim, index }
    }
}

/// Unoriented tessellation input.
///
/// Faces are vertex cycles; polyhedra are lists of face indices. Edge
/// orientation, face orientation and volume orientation are derived.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawComplex {
    pub nodes: Vec<[f64; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Vec<usize>>,
    pub polyhedra: Vec<Vec<usize>>,
}

/// Boundary 2-, 1- and 0-cells of M. Faces carry the orientation induced
/// by their unique adjacent 3-cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySubcomplex {
    pub faces: Vec<(usize, i8)>,
    pub edges: Vec<usize>,
    pub nodes: Vec<usize>,
}

/// Oriented polyhedral complex with geometry.
#[derive(Clone, Debug)]
pub struct CellComplex<T> {
    coords: Vec<[T; 3]>,
    faces_of: [Vec<Vec<(usize, i8)>>; 4],
    cofaces_of: [Vec<Vec<(usize, i8)>>; 4],
    closure: [Vec<[Vec<usize>; 4]>; 4],
    face_cycles: Vec<Vec<usize>>,
    centroids: [Vec<[T; 3]>; 4],
    measures: [Vec<T>; 4],
    boundary: [Vec<bool>; 4],
    normals: Vec<[T; 3]>,
}

fn sorted_union(lists: impl IntoIterator<Item = impl IntoIterator<Item = usize>>) -> Vec<usize> {
    let mut v: Vec<usize> = lists.into_iter().flatten().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Rotates a vertex cycle to start at its minimum and orients it so the
/// second vertex is smaller than the last.
fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    let n = cycle.len();
    let start = (0..n).min_by_key(|&i| cycle[i]).unwrap_or(0);
    let mut c: Vec<usize> = (0..n).map(|k| cycle[(start + k) % n]).collect();
    if n > 2 && c[n - 1] < c[1] {
        c[1..].reverse();
    }
    c
}

impl<T: Real> CellComplex<T> {
    /// Builds and validates an oriented complex from raw incidence.
    pub fn build(raw: &RawComplex) -> Result<Self> {
        let n0 = raw.nodes.len();
        let coords: Vec<[T; 3]> = raw
            .nodes
            .iter()
            .map(|p| [T::lit(p[0]), T::lit(p[1]), T::lit(p[2])])
            .collect();
        if let Some((i, _)) = raw
            .nodes
            .iter()
            .enumerate()
            .find(|(_, p)| p.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Structural(format!("node {i} has a non-finite coordinate")));
        }

        // Edges run from the lower to the higher node index.
        let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(raw.edges.len());
        let mut edge_faces = Vec::with_capacity(raw.edges.len());
        for (e, &[a, b]) in raw.edges.iter().enumerate() {
            if a >= n0 || b >= n0 {
                return Err(Error::Structural(format!("edge {e} references a missing node")));
            }
            if a == b {
                return Err(Error::Structural(format!("edge {e} is a loop at node {a}")));
            }
            let key = (a.min(b), a.max(b));
            if edge_lookup.insert(key, e).is_some() {
                return Err(Error::Structural(format!(
                    "edge {e} duplicates node pair {}-{}",
                    key.0, key.1
                )));
            }
            edge_faces.push(vec![(key.0, -1i8), (key.1, 1i8)]);
        }

        // Faces: canonical cycle, edge signs from traversal direction.
        let mut face_cycles = Vec::with_capacity(raw.faces.len());
        let mut face_edges = Vec::with_capacity(raw.faces.len());
        for (f, cycle) in raw.faces.iter().enumerate() {
            if cycle.len() < 3 {
                return Err(Error::Structural(format!("face {f} has fewer than 3 vertices")));
            }
            if let Some(&v) = cycle.iter().find(|&&v| v >= n0) {
                return Err(Error::Structural(format!("face {f} references missing node {v}")));
            }
            let canon = canonical_cycle(cycle);
            let mut seen = canon.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != canon.len() {
                return Err(Error::Structural(format!("face {f} repeats a vertex")));
            }
            let mut bnd = Vec::with_capacity(canon.len());
            for k in 0..canon.len() {
                let (a, b) = (canon[k], canon[(k + 1) % canon.len()]);
                let e = *edge_lookup.get(&(a.min(b), a.max(b))).ok_or_else(|| {
                    Error::Structural(format!("face {f} references missing edge {a}-{b}"))
                })?;
                bnd.push((e, if a < b { 1i8 } else { -1i8 }));
            }
            bnd.sort_unstable();
            face_cycles.push(canon);
            face_edges.push(bnd);
        }

        let mut cx = CellComplex {
            coords,
            faces_of: [
                vec![Vec::new(); n0],
                edge_faces,
                face_edges,
                Vec::new(),
            ],
            cofaces_of: Default::default(),
            closure: Default::default(),
            face_cycles,
            centroids: Default::default(),
            measures: Default::default(),
            boundary: Default::default(),
            normals: Vec::new(),
        };
        cx.build_closures_upto(2);
        cx.compute_low_geometry();

        let cell_faces = cx.orient_polyhedra(&raw.polyhedra)?;
        cx.faces_of[3] = cell_faces;
        cx.build_closures_upto(3);
        cx.build_cofaces();
        cx.compute_volumes()?;
        cx.mark_boundary()?;
        cx.validate()?;
        Ok(cx)
    }

    fn build_closures_upto(&mut self, top: usize) {
        for p in 0..=top {
            let n = self.faces_of[p].len();
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let mut cl: [Vec<usize>; 4] = Default::default();
                cl[p] = vec![i];
                if p > 0 {
                    let direct: Vec<usize> = self.faces_of[p][i].iter().map(|&(b, _)| b).collect();
                    for r in 0..p - 1 {
                        cl[r] = sorted_union(direct.iter().map(|&b| self.closure[p - 1][b][r].iter().copied()));
                    }
                    cl[p - 1] = sorted_union([direct]);
                }
                out.push(cl);
            }
            self.closure[p] = out;
        }
    }

    fn build_cofaces(&mut self) {
        for p in 0..4 {
            self.cofaces_of[p] = vec![Vec::new(); self.faces_of[p].len()];
        }
        for p in 1..4 {
            for (i, bnd) in self.faces_of[p].iter().enumerate() {
                for &(b, s) in bnd {
                    self.cofaces_of[p - 1][b].push((i, s));
                }
            }
        }
    }

    fn compute_low_geometry(&mut self) {
        let n0 = self.coords.len();
        self.centroids[0] = self.coords.clone();
        self.measures[0] = vec![T::one(); n0];
        let (mut c1, mut m1) = (Vec::new(), Vec::new());
        for bnd in &self.faces_of[1] {
            let (a, b) = (self.coords[bnd[0].0], self.coords[bnd[1].0]);
            c1.push(vec3::scale(vec3::add(a, b), T::lit(0.5)));
            m1.push(vec3::dist(a, b));
        }
        self.centroids[1] = c1;
        self.measures[1] = m1;
        let (mut c2, mut m2, mut nrm) = (Vec::new(), Vec::new(), Vec::new());
        for cyc in &self.face_cycles {
            let pts: Vec<[T; 3]> = cyc.iter().map(|&v| self.coords[v]).collect();
            let c = vec3::mean(pts.iter().copied());
            let mut area = T::zero();
            let mut normal = [T::zero(); 3];
            for k in 0..pts.len() {
                let (a, b) = (pts[k], pts[(k + 1) % pts.len()]);
                area = area + vec3::tri_area(c, a, b);
                normal = vec3::add(normal, vec3::cross(vec3::sub(a, c), vec3::sub(b, c)));
            }
            let len = vec3::norm(normal);
            if len > T::zero() {
                normal = vec3::scale(normal, T::one() / len);
            }
            c2.push(c);
            m2.push(area);
            nrm.push(normal);
        }
        self.centroids[2] = c2;
        self.measures[2] = m2;
        self.normals = nrm;
    }

    /// Orients each polyhedron by propagating across shared edges, then fixes
    /// the global sign so the signed volume about the centroid is positive.
    fn orient_polyhedra(&self, polyhedra: &[Vec<usize>]) -> Result<Vec<Vec<(usize, i8)>>> {
        let n2 = self.faces_of[2].len();
        let mut out = Vec::with_capacity(polyhedra.len());
        for (c, faces) in polyhedra.iter().enumerate() {
            if faces.len() < 4 {
                return Err(Error::Structural(format!("polyhedron {c} has fewer than 4 faces")));
            }
            if let Some(&f) = faces.iter().find(|&&f| f >= n2) {
                return Err(Error::Structural(format!("polyhedron {c} references missing face {f}")));
            }
            let mut fs = faces.clone();
            fs.sort_unstable();
            fs.dedup();
            if fs.len() != faces.len() {
                return Err(Error::Structural(format!("polyhedron {c} repeats a face")));
            }
            // Edge → faces of this cell containing it.
            let mut by_edge: HashMap<usize, Vec<(usize, i8)>> = HashMap::new();
            for (k, &f) in fs.iter().enumerate() {
                for &(e, s) in &self.faces_of[2][f] {
                    by_edge.entry(e).or_default().push((k, s));
                }
            }
            for (e, list) in &by_edge {
                if list.len() != 2 {
                    return Err(Error::Structural(format!(
                        "polyhedron {c} is not closed: edge {e} lies on {} of its faces",
                        list.len()
                    )));
                }
            }
            let mut sign = vec![0i8; fs.len()];
            let mut queue = VecDeque::from([0usize]);
            sign[0] = 1;
            while let Some(k) = queue.pop_front() {
                for &(e, s) in &self.faces_of[2][fs[k]] {
                    let pair = &by_edge[&e];
                    let &(other, so) = pair.iter().find(|&&(j, _)| j != k).expect("two faces");
                    let want = -sign[k] * s * so;
                    if sign[other] == 0 {
                        sign[other] = want;
                        queue.push_back(other);
                    } else if sign[other] != want {
                        return Err(Error::Orientation(format!(
                            "polyhedron {c} is not orientable across edge {e}"
                        )));
                    }
                }
            }
            if let Some(k) = sign.iter().position(|&s| s == 0) {
                return Err(Error::Structural(format!(
                    "polyhedron {c} is disconnected: face {} unreachable",
                    fs[k]
                )));
            }
            let o = vec3::mean(
                sorted_union(fs.iter().map(|&f| self.face_cycles[f].iter().copied()))
                    .into_iter()
                    .map(|v| self.coords[v]),
            );
            let vol: T = fs
                .iter()
                .zip(&sign)
                .map(|(&f, &s)| T::from_sign(s) * self.cone_volume(f, o))
                .sum();
            let flip = if vol < T::zero() { -1 } else { 1 };
            out.push(fs.iter().zip(&sign).map(|(&f, &s)| (f, s * flip)).collect());
        }
        Ok(out)
    }

    /// Signed volume of the cone from `apex` over face `f` in its canonical orientation.
    fn cone_volume(&self, f: usize, apex: [T; 3]) -> T {
        let cyc = &self.face_cycles[f];
        let fc = self.centroids[2][f];
        (0..cyc.len())
            .map(|k| {
                let a = self.coords[cyc[k]];
                let b = self.coords[cyc[(k + 1) % cyc.len()]];
                vec3::tet_volume(apex, fc, a, b)
            })
            .sum()
    }

    fn compute_volumes(&mut self) -> Result<()> {
        let n3 = self.faces_of[3].len();
        let (mut cents, mut vols) = (Vec::with_capacity(n3), Vec::with_capacity(n3));
        for c in 0..n3 {
            let o = vec3::mean(self.closure[3][c][0].iter().map(|&v| self.coords[v]));
            let vol: T = self.faces_of[3][c]
                .iter()
                .map(|&(f, s)| T::from_sign(s) * self.cone_volume(f, o))
                .sum();
            if vol <= T::zero() {
                return Err(Error::Orientation(format!(
                    "polyhedron {c} has non-positive oriented volume {vol:e}"
                )));
            }
            cents.push(o);
            vols.push(vol);
        }
        self.centroids[3] = cents;
        self.measures[3] = vols;
        Ok(())
    }

    fn mark_boundary(&mut self) -> Result<()> {
        let counts = self.counts();
        for p in 0..4 {
            self.boundary[p] = vec![false; counts[p]];
        }
        if counts[3] == 0 {
            return Ok(());
        }
        for f in 0..counts[2] {
            match self.cofaces_of[2][f].len() {
                0 => {
                    return Err(Error::Structural(format!("face {f} belongs to no polyhedron")));
                }
                1 => {
                    self.boundary[2][f] = true;
                    for r in 0..2 {
                        for &b in &self.closure[2][f][r] {
                            self.boundary[r][b] = true;
                        }
                    }
                }
                2 => {}
                k => {
                    return Err(Error::Structural(format!(
                        "face {f} is shared by {k} polyhedra (non-manifold)"
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for p in 1..3 {
            let prod = self.boundary_matrix::<i64>(p)?.matmul(&self.boundary_matrix::<i64>(p + 1)?)?;
            if !prod.is_zero() {
                let (r, c, _) = prod.triplets().next().expect("nonzero");
                return Err(Error::Orientation(format!(
                    "boundary of boundary is nonzero at ({}-cell {r}, {}-cell {c})",
                    p - 1,
                    p + 1
                )));
            }
        }
        for (f, cof) in self.cofaces_of[2].iter().enumerate() {
            if cof.len() == 2 && cof[0].1 == cof[1].1 {
                return Err(Error::Orientation(format!(
                    "interior face {f} is not compatibly oriented between polyhedra {} and {}",
                    cof[0].0, cof[1].0
                )));
            }
        }
        for p in 1..4 {
            for (i, &m) in self.measures[p].iter().enumerate() {
                if !(m.to_f64_lossy() >= MIN_MEASURE) {
                    return Err(Error::Degeneracy {
                        dim: p,
                        index: i,
                        measure: m.to_f64_lossy(),
                        threshold: MIN_MEASURE,
                    });
                }
            }
        }
        Ok(())
    }

    /// Cell counts N₀..N₃.
    pub fn counts(&self) -> [usize; 4] {
        [
            self.faces_of[0].len(),
            self.faces_of[1].len(),
            self.faces_of[2].len(),
            self.faces_of[3].len(),
        ]
    }

    pub fn count(&self, dim: usize) -> usize {
        self.faces_of[dim].len()
    }

    /// Cells of the given dimension as ids.
    pub fn cells(&self, dim: usize) -> impl Iterator<Item = CellId> {
        (0..self.count(dim)).map(move |i| CellId::new(dim, i))
    }

    pub fn node_coords(&self) -> &[[T; 3]] {
        &self.coords
    }

    /// Boundary cells of `c` with relative orientations.
    pub fn faces_of(&self, c: CellId) -> &[(usize, i8)] {
        &self.faces_of[c.dim][c.index]
    }

    /// Cells having `c` on their boundary, with relative orientations.
    pub fn cofaces_of(&self, c: CellId) -> &[(usize, i8)] {
        &self.cofaces_of[c.dim][c.index]
    }

    /// Sorted indices of the `dim`-cells in the closure of `c`.
    pub fn closure(&self, c: CellId, dim: usize) -> &[usize] {
        if dim > c.dim {
            return &[];
        }
        &self.closure[c.dim][c.index][dim]
    }

    /// Whether `lower ⪯ upper` in the face poset.
    pub fn contains(&self, upper: CellId, lower: CellId) -> bool {
        lower.dim <= upper.dim && self.closure(upper, lower.dim).binary_search(&lower.index).is_ok()
    }

    /// Canonical vertex cycle of a face.
    pub fn face_cycle(&self, face: usize) -> &[usize] {
        &self.face_cycles[face]
    }

    /// Unit normal of a face in its canonical orientation.
    pub fn face_normal(&self, face: usize) -> [T; 3] {
        self.normals[face]
    }

    /// Vertex-average centroid of a cell.
    pub fn centroid(&self, c: CellId) -> [T; 3] {
        self.centroids[c.dim][c.index]
    }

    pub fn measure(&self, c: CellId) -> T {
        self.measures[c.dim][c.index]
    }

    pub fn measures(&self, dim: usize) -> &[T] {
        &self.measures[dim]
    }

    pub fn is_boundary(&self, c: CellId) -> bool {
        self.boundary[c.dim][c.index]
    }

    /// `(c_p, b_{p−1}, ε)` incidence list.
    pub fn incidence(&self, p: usize) -> Vec<(usize, usize, i8)> {
        if p == 0 || p > 3 {
            return Vec::new();
        }
        self.faces_of[p]
            .iter()
            .enumerate()
            .flat_map(|(i, bnd)| bnd.iter().map(move |&(b, s)| (i, b, s)))
            .collect()
    }

    /// The N_{p−1}×N_p boundary operator ∂_p.
    pub fn boundary_matrix<R: Ring>(&self, p: usize) -> Result<OperatorMatrix<R>> {
        if !(1..=3).contains(&p) {
            return Err(Error::Usage(format!("boundary operator defined for p in 1..=3, got {p}")));
        }
        let trip = self
            .incidence(p)
            .into_iter()
            .map(|(c, b, s)| (b, c, R::from_sign(s)))
            .collect();
        OperatorMatrix::from_triplets(
            (Space::new(ComplexId::Material, p - 1), self.count(p - 1)),
            (Space::new(ComplexId::Material, p), self.count(p)),
            trip,
            PhysDim::DIMENSIONLESS,
        )
    }

    /// The N_{p+1}×N_p coboundary operator δ_p = ∂_{p+1}ᵀ.
    pub fn coboundary_matrix<R: Ring>(&self, p: usize) -> Result<OperatorMatrix<R>> {
        if p > 2 {
            return Err(Error::Usage(format!("coboundary operator defined for p in 0..=2, got {p}")));
        }
        Ok(self.boundary_matrix::<R>(p + 1)?.transpose())
    }

    /// Boundary cells with induced orientation on the faces.
    pub fn boundary_subcomplex(&self) -> BoundarySubcomplex {
        let faces = (0..self.count(2))
            .filter(|&f| self.boundary[2][f])
            .map(|f| (f, self.cofaces_of[2][f][0].1))
            .collect();
        let pick = |d: usize| (0..self.count(d)).filter(|&i| self.boundary[d][i]).collect();
        BoundarySubcomplex {
            faces,
            edges: pick(1),
            nodes: pick(0),
        }
    }

    /// N₀ − N₁ + N₂ − N₃.
    pub fn euler_characteristic(&self) -> i64 {
        let n = self.counts();
        n[0] as i64 - n[1] as i64 + n[2] as i64 - n[3] as i64
    }

    /// Axis-aligned bounding box of the nodes.
    pub fn bounding_box(&self) -> ([T; 3], [T; 3]) {
        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        for p in &self.coords {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Outward unit normal of a boundary face.
    pub fn outward_normal(&self, face: usize) -> Option<[T; 3]> {
        if !self.boundary[2][face] {
            return None;
        }
        let s = self.cofaces_of[2][face][0].1;
        Some(vec3::scale(self.normals[face], T::from_sign(s)))
    }
}
