//! Forman subdivision K of a polyhedral complex.
//!
//! A p-cell of K is a pair `(upper → lower)` of M-cells with `lower ⪯ upper`
//! and `dim upper − dim lower = p`. Every 3-cell `(c₃ → c₀)` is a quasi-cube
//! whose faces are addressed through a chart in cube coordinates.

use std::collections::HashMap;

use crate::complex::{CellComplex, CellId, MIN_MEASURE};
use crate::error::{Error, Result};
use crate::scalar::{vec3, Real, Ring};
use crate::sparse::{ComplexId, OperatorMatrix, Space};
use crate::units::PhysDim;

/// A cell of K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FormanCell {
    pub upper: CellId,
    pub lower: CellId,
}

impl FormanCell {
    pub fn dim(&self) -> usize {
        self.upper.dim - self.lower.dim
    }
}

/// A face of a quasi-cube chart, resolved to a K cell and its orientation
/// relative to the standard cube orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ChartFace {
    pub dim: usize,
    pub index: usize,
    pub orientation: i8,
}

/// Encodes a chart face by its fixed-at-one and free direction masks.
pub fn chart_code(ones: u8, free: u8) -> usize {
    debug_assert_eq!(ones & free, 0);
    (0..3).fold(0, |acc, i| {
        let digit = if free >> i & 1 == 1 {
            2
        } else {
            (ones >> i & 1) as usize
        };
        acc + digit * 3usize.pow(i)
    })
}

/// Inverse of [`chart_code`].
pub fn chart_decode(code: usize) -> (u8, u8) {
    let (mut ones, mut free, mut c) = (0u8, 0u8, code);
    for i in 0..3 {
        match c % 3 {
            1 => ones |= 1 << i,
            2 => free |= 1 << i,
            _ => {}
        }
        c /= 3;
    }
    (ones, free)
}

/// A 3-cell of K seen as a topological cube.
#[derive(Clone, Debug)]
pub struct QuasiCube {
    /// Index of the K 3-cell.
    pub cell: usize,
    /// The M 3-cell `c₃`.
    pub top: usize,
    /// The M node `c₀`.
    pub base: usize,
    /// The three M-edges at `c₀` inside `c₃`, ascending.
    pub directions: [usize; 3],
    m_cells: [CellId; 8],
    faces: [ChartFace; 27],
}

impl QuasiCube {
    /// The M-cell spanned by the directions in `mask`.
    pub fn m_cell(&self, mask: u8) -> CellId {
        self.m_cells[mask as usize]
    }

    /// The K cell with fixed-at-one set `ones` and free set `free`.
    pub fn face(&self, ones: u8, free: u8) -> ChartFace {
        self.faces[chart_code(ones, free)]
    }

    /// All 27 faces as `(ones, free, face)`.
    pub fn faces(&self) -> impl Iterator<Item = (u8, u8, ChartFace)> + '_ {
        (0..27).map(move |c| {
            let (o, f) = chart_decode(c);
            (o, f, self.faces[c])
        })
    }

    /// K 0-cells at the 8 cube corners, indexed by corner mask.
    pub fn vertices(&self) -> [usize; 8] {
        std::array::from_fn(|v| self.face(v as u8, 0).index)
    }
}

/// Shuffle parity of `(I, J)`: `−1` raised to the number of pairs `i ∈ I, j ∈ J` with `i > j`.
pub fn shuffle_sign(i_mask: u8, j_mask: u8) -> i8 {
    let mut inv = 0;
    for i in 0..3 {
        if i_mask >> i & 1 == 1 {
            inv += (j_mask & ((1u8 << i) - 1)).count_ones();
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn pack(c: FormanCell) -> u64 {
    debug_assert!(c.upper.index < (1 << 29) && c.lower.index < (1 << 29));
    ((c.upper.dim * 4 + c.lower.dim) as u64) << 58 | (c.upper.index as u64) << 29 | c.lower.index as u64
}

/// The Forman subdivision with incidence, geometry and quasi-cube charts.
#[derive(Clone, Debug)]
pub struct FormanComplex<T> {
    cells: [Vec<FormanCell>; 4],
    lookup: HashMap<u64, usize>,
    faces_of: [Vec<Vec<(usize, i8)>>; 4],
    cofaces_of: [Vec<Vec<(usize, i8)>>; 4],
    coords: Vec<[T; 3]>,
    measures: [Vec<T>; 4],
    boundary: [Vec<bool>; 4],
    cubes: Vec<QuasiCube>,
    home: [Vec<(usize, u8)>; 4],
    m_counts: [usize; 4],
    handedness: i8,
}

impl<T: Real> FormanComplex<T> {
    /// Subdivides `m`, orients K, charts every quasi-cube and computes kite measures.
    pub fn build(m: &CellComplex<T>) -> Result<Self> {
        let m_counts = m.counts();
        let mut cells: [Vec<FormanCell>; 4] = Default::default();
        for q in 0..4 {
            for r in 0..=q {
                for u in m.cells(q) {
                    for &l in m.closure(u, r) {
                        cells[q - r].push(FormanCell {
                            upper: u,
                            lower: CellId::new(r, l),
                        });
                    }
                }
            }
        }
        // Order p-cells by (dim upper, upper, lower) for locality.
        for list in cells.iter_mut() {
            list.sort_by_key(|c| (c.upper.dim, c.upper.index, c.lower.index));
        }
        let mut lookup = HashMap::with_capacity(cells.iter().map(Vec::len).sum());
        for list in &cells {
            for (i, &c) in list.iter().enumerate() {
                lookup.insert(pack(c), i);
            }
        }

        let mut k = FormanComplex {
            cells,
            lookup,
            faces_of: Default::default(),
            cofaces_of: Default::default(),
            coords: Vec::new(),
            measures: Default::default(),
            boundary: Default::default(),
            cubes: Vec::new(),
            home: Default::default(),
            m_counts,
            handedness: 1,
        };
        k.build_incidence(m);
        k.coords = k.cells[0].iter().map(|c| m.centroid(c.upper)).collect();
        k.boundary = std::array::from_fn(|p| {
            k.cells[p]
                .iter()
                .map(|c| c.upper.dim <= 2 && m.is_boundary(c.upper))
                .collect()
        });
        k.build_charts(m)?;
        k.compute_measures(m)?;
        k.validate()?;
        Ok(k)
    }

    fn build_incidence(&mut self, m: &CellComplex<T>) {
        self.faces_of[0] = vec![Vec::new(); self.cells[0].len()];
        for p in 1..4 {
            let mut all = Vec::with_capacity(self.cells[p].len());
            for c in &self.cells[p] {
                let (u, l) = (c.upper, c.lower);
                let mut bnd = Vec::with_capacity(2 * p);
                for &(uf, s) in m.faces_of(u) {
                    let uf = CellId::new(u.dim - 1, uf);
                    if uf.dim >= l.dim && m.contains(uf, l) {
                        bnd.push((self.lookup[&pack(FormanCell { upper: uf, lower: l })], s));
                    }
                }
                let sign: i8 = if p % 2 == 0 { 1 } else { -1 };
                for &(lc, s) in m.cofaces_of(l) {
                    let lc = CellId::new(l.dim + 1, lc);
                    if lc.dim <= u.dim && m.contains(u, lc) {
                        bnd.push((self.lookup[&pack(FormanCell { upper: u, lower: lc })], sign * s));
                    }
                }
                bnd.sort_unstable();
                all.push(bnd);
            }
            self.faces_of[p] = all;
        }
        for p in 0..4 {
            self.cofaces_of[p] = vec![Vec::new(); self.cells[p].len()];
        }
        for p in 1..4 {
            for (i, bnd) in self.faces_of[p].iter().enumerate() {
                for &(b, s) in bnd {
                    self.cofaces_of[p - 1][b].push((i, s));
                }
            }
        }
    }

    fn incidence_sign(&self, dim: usize, cell: usize, face: usize) -> Option<i8> {
        self.faces_of[dim][cell]
            .iter()
            .find(|&&(b, _)| b == face)
            .map(|&(_, s)| s)
    }

    fn build_charts(&mut self, m: &CellComplex<T>) -> Result<()> {
        let mut cubes = Vec::with_capacity(self.cells[3].len());
        for (ci, c) in self.cells[3].iter().enumerate() {
            let (c3, c0) = (c.upper, c.lower);
            let node = CellId::new(0, c0.index);
            let mut dirs: Vec<usize> = m
                .cofaces_of(node)
                .iter()
                .map(|&(e, _)| e)
                .filter(|&e| m.contains(c3, CellId::new(1, e)))
                .collect();
            dirs.sort_unstable();
            if dirs.len() != 3 {
                return Err(Error::Topology(format!(
                    "polyhedron {} is not simple at vertex {}: {} incident edges (expected 3)",
                    c3.index,
                    c0.index,
                    dirs.len()
                )));
            }
            let dirs = [dirs[0], dirs[1], dirs[2]];
            let mut m_cells = [node; 8];
            m_cells[7] = c3;
            for i in 0..3 {
                m_cells[1 << i] = CellId::new(1, dirs[i]);
            }
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let (ei, ej) = (CellId::new(1, dirs[i]), CellId::new(1, dirs[j]));
                let shared: Vec<usize> = m
                    .cofaces_of(ei)
                    .iter()
                    .map(|&(f, _)| f)
                    .filter(|&f| {
                        let f = CellId::new(2, f);
                        m.contains(f, ej) && m.contains(c3, f)
                    })
                    .collect();
                if shared.len() != 1 {
                    return Err(Error::Topology(format!(
                        "polyhedron {} at vertex {}: edges {} and {} share {} faces (expected 1)",
                        c3.index,
                        c0.index,
                        dirs[i],
                        dirs[j],
                        shared.len()
                    )));
                }
                m_cells[(1 << i) | (1 << j)] = CellId::new(2, shared[0]);
            }

            let mut faces = [ChartFace::default(); 27];
            let mut order: Vec<usize> = (0..27).collect();
            order.sort_by_key(|&code| chart_decode(code).1.count_ones());
            for &code in &order {
                let (ones, free) = chart_decode(code);
                let upper = m_cells[(ones | free) as usize];
                let lower = m_cells[ones as usize];
                let dim = free.count_ones() as usize;
                let index = self.lookup[&pack(FormanCell { upper, lower })];
                let orientation = if dim == 0 {
                    1
                } else {
                    // Bottom facet across the lowest free direction has standard sign −1.
                    let d = free & free.wrapping_neg();
                    let g = faces[chart_code(ones, free & !d)];
                    let eps = self.incidence_sign(dim, index, g.index).ok_or_else(|| {
                        Error::Orientation(format!("quasi-cube {ci}: chart facet missing from boundary"))
                    })?;
                    -eps * g.orientation
                };
                faces[code] = ChartFace { dim, index, orientation };
            }
            // Every facet must agree with the standard cubical boundary.
            for code in 0..27 {
                let (ones, free) = chart_decode(code);
                let f = faces[code];
                if f.dim == 0 {
                    continue;
                }
                if self.faces_of[f.dim][f.index].len() != 2 * f.dim {
                    return Err(Error::Topology(format!(
                        "quasi-cube {ci}: K cell of dimension {} has {} facets",
                        f.dim,
                        self.faces_of[f.dim][f.index].len()
                    )));
                }
                let mut pos = 0;
                for i in 0..3u8 {
                    let d = 1 << i;
                    if free & d == 0 {
                        continue;
                    }
                    let base: i8 = if pos % 2 == 0 { 1 } else { -1 };
                    pos += 1;
                    for (g_ones, std) in [(ones | d, base), (ones, -base)] {
                        let g = faces[chart_code(g_ones, free & !d)];
                        let eps = self.incidence_sign(f.dim, f.index, g.index).unwrap_or(0);
                        if f.orientation * std != eps * g.orientation {
                            return Err(Error::Orientation(format!(
                                "quasi-cube {ci} (polyhedron {}, vertex {}): K orientation disagrees with the cube chart",
                                c3.index, c0.index
                            )));
                        }
                    }
                }
            }
            cubes.push(QuasiCube {
                cell: ci,
                top: c3.index,
                base: c0.index,
                directions: dirs,
                m_cells,
                faces,
            });
        }
        let mut home: [Vec<(usize, u8)>; 4] =
            std::array::from_fn(|p| vec![(usize::MAX, 0u8); self.cells[p].len()]);
        for (qi, q) in cubes.iter().enumerate() {
            for code in 0..27 {
                let f = q.faces[code];
                if home[f.dim][f.index].0 == usize::MAX {
                    home[f.dim][f.index] = (qi, code as u8);
                }
            }
        }
        if m.count(3) > 0 {
            for (p, h) in home.iter().enumerate() {
                if let Some(i) = h.iter().position(|&(q, _)| q == usize::MAX) {
                    return Err(Error::Topology(format!("K {p}-cell {i} lies in no quasi-cube")));
                }
            }
        }
        self.cubes = cubes;
        self.home = home;
        Ok(())
    }

    fn compute_measures(&mut self, m: &CellComplex<T>) -> Result<()> {
        self.measures[0] = vec![T::one(); self.cells[0].len()];
        self.measures[1] = self.cells[1]
            .iter()
            .map(|c| vec3::dist(m.centroid(c.upper), m.centroid(c.lower)))
            .collect();
        let mut areas = Vec::with_capacity(self.cells[2].len());
        for c in &self.cells[2] {
            let (u, l) = (c.upper, c.lower);
            let mids: Vec<CellId> = m
                .cofaces_of(l)
                .iter()
                .map(|&(a, _)| CellId::new(l.dim + 1, a))
                .filter(|&a| m.contains(u, a))
                .collect();
            if mids.len() != 2 {
                return Err(Error::Topology(format!(
                    "interval between {}-cell {} and {}-cell {} is not a diamond",
                    u.dim, u.index, l.dim, l.index
                )));
            }
            let (pu, pl) = (m.centroid(u), m.centroid(l));
            areas.push(
                vec3::tri_area(pl, m.centroid(mids[0]), pu) + vec3::tri_area(pl, pu, m.centroid(mids[1])),
            );
        }
        self.measures[2] = areas;
        let mut vols = Vec::with_capacity(self.cubes.len());
        let mut hands = Vec::with_capacity(self.cubes.len());
        for q in &self.cubes {
            let at = |mask: u8| m.centroid(q.m_cell(mask));
            let (o, top) = (at(0), at(7));
            let mut v = T::zero();
            for (i, j, kk) in [(0u8, 1u8, 2u8), (1, 2, 0), (2, 0, 1)] {
                let ei = at(1 << i);
                let fij = at(1 << i | 1 << j);
                let fik = at(1 << i | 1 << kk);
                v = v + vec3::tet_volume(o, ei, fij, top) + vec3::tet_volume(o, ei, top, fik);
            }
            vols.push(v.abs());
            let o = q.face(0, 0b111).orientation;
            hands.push(if v < T::zero() { -o } else { o });
        }
        self.measures[3] = vols;
        if let Some(&h) = hands.first() {
            if let Some(i) = hands.iter().position(|&x| x != h) {
                return Err(Error::Orientation(format!(
                    "K 3-cell {i} is embedded with the opposite handedness to K 3-cell 0"
                )));
            }
            self.handedness = h;
        }
        for p in 1..4 {
            for (i, &x) in self.measures[p].iter().enumerate() {
                if !(x.to_f64_lossy() >= MIN_MEASURE) {
                    return Err(Error::Degeneracy {
                        dim: p,
                        index: i,
                        measure: x.to_f64_lossy(),
                        threshold: MIN_MEASURE,
                    });
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for p in 1..3 {
            let prod = self.boundary_matrix::<i64>(p)?.matmul(&self.boundary_matrix::<i64>(p + 1)?)?;
            if !prod.is_zero() {
                return Err(Error::Orientation(format!(
                    "boundary of boundary on K is nonzero in dimension {}",
                    p - 1
                )));
            }
        }
        if self.m_counts[3] > 0 {
            for (i, cof) in self.cofaces_of[2].iter().enumerate() {
                let ok = match cof.len() {
                    1 => self.boundary[2][i],
                    2 => cof[0].1 == -cof[1].1 && !self.boundary[2][i],
                    _ => false,
                };
                if !ok {
                    return Err(Error::Orientation(format!("K 2-cell {i} is not compatibly oriented")));
                }
            }
        }
        Ok(())
    }
}

impl<T> FormanComplex<T> {
    pub fn counts(&self) -> [usize; 4] {
        std::array::from_fn(|p| self.cells[p].len())
    }

    pub fn count(&self, p: usize) -> usize {
        self.cells[p].len()
    }

    /// Cell counts of the underlying material complex.
    pub fn material_counts(&self) -> [usize; 4] {
        self.m_counts
    }

    pub fn cells(&self, p: usize) -> &[FormanCell] {
        &self.cells[p]
    }

    pub fn cell(&self, p: usize, i: usize) -> FormanCell {
        self.cells[p][i]
    }

    /// Dense index of a pair, if it is a cell of K.
    pub fn index_of(&self, upper: CellId, lower: CellId) -> Option<usize> {
        if lower.dim > upper.dim || upper.index >= 1 << 29 || lower.index >= 1 << 29 {
            return None;
        }
        self.lookup.get(&pack(FormanCell { upper, lower })).copied()
    }

    /// The K 0-cell sitting at M-cell `c`.
    pub fn vertex_of(&self, c: CellId) -> usize {
        self.index_of(c, c).expect("every M-cell has a K vertex")
    }

    pub fn faces_of(&self, p: usize, i: usize) -> &[(usize, i8)] {
        &self.faces_of[p][i]
    }

    pub fn cofaces_of(&self, p: usize, i: usize) -> &[(usize, i8)] {
        &self.cofaces_of[p][i]
    }

    pub fn coords(&self) -> &[[T; 3]] {
        &self.coords
    }

    pub fn measures(&self, p: usize) -> &[T] {
        &self.measures[p]
    }

    pub fn is_boundary(&self, p: usize, i: usize) -> bool {
        self.boundary[p][i]
    }

    /// `+1` if the K orientation of 3-cells is right-handed in the embedding, `−1` otherwise.
    pub fn handedness(&self) -> i8 {
        self.handedness
    }

    /// Orientation of a boundary K 2-cell induced by its unique 3-cell, if it has exactly one.
    pub fn induced_boundary_sign(&self, i: usize) -> Option<i8> {
        match self.cofaces_of[2][i].as_slice() {
            [(_, s)] => Some(*s),
            _ => None,
        }
    }

    pub fn quasi_cubes(&self) -> &[QuasiCube] {
        &self.cubes
    }

    /// The quasi-cube whose index equals that of K 3-cell `cell`.
    pub fn quasi_cube(&self, cell: usize) -> &QuasiCube {
        &self.cubes[cell]
    }

    /// A fixed chart `(cube, code)` containing K cell `(p, i)`.
    pub fn home_chart(&self, p: usize, i: usize) -> (usize, usize) {
        let (q, c) = self.home[p][i];
        (q, c as usize)
    }

    /// K 0-cells in the closure of `(p, i)`, sorted.
    pub fn vertices_of(&self, p: usize, i: usize) -> Vec<usize> {
        let (q, code) = self.home_chart(p, i);
        if p == 0 {
            return vec![i];
        }
        let (ones, free) = chart_decode(code);
        let cube = &self.cubes[q];
        let mut v: Vec<usize> = (0..8u8)
            .filter(|&s| s & !free == 0)
            .map(|s| cube.face(ones | s, 0).index)
            .collect();
        v.sort_unstable();
        v
    }

    /// Incidence `(c_p, b_{p−1}, ε)` on K.
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

    /// ∂_p on K.
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
            (Space::new(ComplexId::Forman, p - 1), self.count(p - 1)),
            (Space::new(ComplexId::Forman, p), self.count(p)),
            trip,
            PhysDim::DIMENSIONLESS,
        )
    }

    /// δ_p = ∂_{p+1}ᵀ on K.
    pub fn coboundary_matrix<R: Ring>(&self, p: usize) -> Result<OperatorMatrix<R>> {
        if p > 2 {
            return Err(Error::Usage(format!("coboundary operator defined for p in 0..=2, got {p}")));
        }
        Ok(self.boundary_matrix::<R>(p + 1)?.transpose())
    }

    pub fn euler_characteristic(&self) -> i64 {
        let n = self.counts();
        n[0] as i64 - n[1] as i64 + n[2] as i64 - n[3] as i64
    }
}
