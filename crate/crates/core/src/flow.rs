//! Steady and transient Darcy flow on K.
//!
//! Unknowns are pressures at the K 0-cells outside the Dirichlet set. Interior
//! rows impose `(δ*₁ Π₁ δ₀ π)(c₀) = 0`. Neumann vertices are handled by one of
//! two [`NeumannScheme`]s; the default keeps the balance row and adds the
//! prescribed boundary flux as a source.

use std::collections::BTreeMap;

use crate::calculus::{DiscreteCalculus, MaterialLaplacian};
use crate::cochain::Cochain;
use crate::complex::{CellComplex, CellId};
use crate::error::{Error, Result};
use crate::forman::FormanComplex;
use crate::linalg::{SolveOptions, SparseLu};
use crate::scalar::Real;
use crate::sparse::{ComplexId, OperatorMatrix, Space};
use crate::units::PhysDim;

/// Disjoint Dirichlet and Neumann sets of boundary 2-cells of M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPartition {
    dirichlet: Vec<usize>,
    neumann: Vec<usize>,
}

impl BoundaryPartition {
    /// Validates that the two sets are disjoint and cover the boundary exactly.
    pub fn new<T: Real>(m: &CellComplex<T>, mut dirichlet: Vec<usize>, mut neumann: Vec<usize>) -> Result<Self> {
        dirichlet.sort_unstable();
        dirichlet.dedup();
        neumann.sort_unstable();
        neumann.dedup();
        let mut all: Vec<usize> = dirichlet.iter().chain(&neumann).copied().collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("face {} is both Dirichlet and Neumann", w[0])));
        }
        let boundary: Vec<usize> = m.boundary_subcomplex().faces.iter().map(|&(f, _)| f).collect();
        if all != boundary {
            let stray = all.iter().find(|f| boundary.binary_search(f).is_err());
            return Err(Error::Validation(match stray {
                Some(f) => format!("face {f} is not a boundary face"),
                None => "Dirichlet and Neumann sets do not cover the boundary".to_string(),
            }));
        }
        Ok(BoundaryPartition { dirichlet, neumann })
    }

    /// Dirichlet on the given faces, Neumann on the rest of the boundary.
    pub fn with_dirichlet<T: Real>(m: &CellComplex<T>, dirichlet: Vec<usize>) -> Result<Self> {
        let mut d = dirichlet.clone();
        d.sort_unstable();
        let neumann = m
            .boundary_subcomplex()
            .faces
            .iter()
            .map(|&(f, _)| f)
            .filter(|f| d.binary_search(f).is_err())
            .collect();
        Self::new(m, dirichlet, neumann)
    }

    pub fn dirichlet(&self) -> &[usize] {
        &self.dirichlet
    }

    pub fn neumann(&self) -> &[usize] {
        &self.neumann
    }
}

/// The partition transported to K: sorted K-cell indices per dimension 0..=2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySets {
    pub dirichlet: [Vec<usize>; 3],
    pub neumann: [Vec<usize>; 3],
}

fn closure_marks<T: Real>(m: &CellComplex<T>, faces: &[usize]) -> [Vec<bool>; 3] {
    let mut marks: [Vec<bool>; 3] = std::array::from_fn(|q| vec![false; m.count(q)]);
    for &f in faces {
        let c = CellId::new(2, f);
        for (q, mark) in marks.iter_mut().enumerate() {
            for &i in m.closure(c, q) {
                mark[i] = true;
            }
        }
    }
    marks
}

/// `Γ^p = {(c_q → b) : c_q in the closure of Σ}`; shared vertices go to Dirichlet.
pub fn induce_boundary_sets<T: Real>(
    m: &CellComplex<T>,
    k: &FormanComplex<T>,
    partition: &BoundaryPartition,
) -> BoundarySets {
    let d = closure_marks(m, partition.dirichlet());
    let n = closure_marks(m, partition.neumann());
    let mut sets = BoundarySets {
        dirichlet: Default::default(),
        neumann: Default::default(),
    };
    for p in 0..3 {
        for (i, c) in k.cells(p).iter().enumerate() {
            let u = c.upper;
            if u.dim > 2 {
                continue;
            }
            let in_d = d[u.dim][u.index];
            if in_d {
                sets.dirichlet[p].push(i);
            }
            if n[u.dim][u.index] && !(p == 0 && in_d) {
                sets.neumann[p].push(i);
            }
        }
    }
    sets
}

/// Boundary Hodge star `⋆_{Γ,2}` restricted to the given boundary K 2-cells:
/// `(⋆σ)(v) = Σ_{b∋v} s(b) σ(b) / Σ_{b∋v} μ(b)` with `s` the induced orientation.
pub fn boundary_hodge<T: Real>(k: &FormanComplex<T>, cells2: &[usize]) -> Result<OperatorMatrix<T>> {
    let mut area = vec![T::zero(); k.count(0)];
    let mut incident = Vec::with_capacity(4 * cells2.len());
    for &b in cells2 {
        let s = k
            .induced_boundary_sign(b)
            .ok_or_else(|| Error::Validation(format!("K 2-cell {b} is not on the boundary")))?;
        for v in k.vertices_of(2, b) {
            area[v] = area[v] + k.measures(2)[b];
            incident.push((v, b, s));
        }
    }
    let trip = incident
        .into_iter()
        .map(|(v, b, s)| (v, b, T::from_sign(s) / area[v]))
        .collect();
    OperatorMatrix::from_triplets(
        (Space::new(ComplexId::Forman, 0), k.count(0)),
        (Space::new(ComplexId::Forman, 2), k.count(2)),
        trip,
        PhysDim::new(0, -2, 0),
    )
}

/// The kind of equation held by a row of the reduced system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Conservation,
    Neumann,
}

/// How Neumann data enters the system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NeumannScheme {
    /// Balance rows `(δ*₁Π₁δ₀π)(v) = −F(v)/w₀(v)` at Neumann vertices, where
    /// `F(v) = a(v)·(⋆_Γ f)(v)` is the outward flow lumped to `v` and `a(v)` is
    /// a quarter of the boundary area around `v`. The matrix is a weighted graph
    /// Laplacian and is nonsingular once anchored.
    #[default]
    Natural,
    /// Rows `(⋆_Γ ⋆₁ Π₁ δ₀ π)(v) = (⋆_Γ f)(v)` scaled by the mean length of
    /// adjacent Neumann edges. The averaged flux leaves checkerboard pressure
    /// modes on insulated faces unconstrained, so these systems are singular
    /// on the grids tested.
    Projected,
}

/// A flow problem on a fixed complex and its operators.
#[derive(Clone, Debug)]
pub struct FlowProblem<'a, T: Real> {
    pub k: &'a FormanComplex<T>,
    pub calc: &'a DiscreteCalculus<T>,
    /// Π₁ per K 1-cell.
    pub conductivity: Vec<T>,
    /// Π₀ per K 0-cell, used only by transient steps.
    pub compressibility: Vec<T>,
    pub sets: BoundarySets,
    /// Prescribed pressure per Dirichlet K 0-cell.
    pub dirichlet: BTreeMap<usize, T>,
    /// Prescribed flow rate per K 2-cell (zero off the Neumann set).
    pub neumann_flux: Vec<T>,
    /// Optional pinned pressure for problems without Dirichlet data.
    pub reference: Option<(usize, T)>,
    pub neumann_scheme: NeumannScheme,
}

impl<'a, T: Real> FlowProblem<'a, T> {
    /// Problem with pressures given per Dirichlet face (aligned with
    /// `partition.dirichlet()`) and insulated Neumann faces.
    pub fn new(
        m: &CellComplex<T>,
        k: &'a FormanComplex<T>,
        calc: &'a DiscreteCalculus<T>,
        partition: &BoundaryPartition,
        face_pressure: &[T],
        conductivity: Vec<T>,
    ) -> Result<Self> {
        if face_pressure.len() != partition.dirichlet().len() {
            return Err(Error::Validation(format!(
                "{} Dirichlet faces but {} pressures",
                partition.dirichlet().len(),
                face_pressure.len()
            )));
        }
        if conductivity.len() != k.count(1) {
            return Err(Error::Validation(format!(
                "conductivity has {} entries, K has {} 1-cells",
                conductivity.len(),
                k.count(1)
            )));
        }
        if let Some(i) = conductivity.iter().position(|c| !(c.is_finite() && *c >= T::zero())) {
            return Err(Error::Validation(format!("conductivity of K 1-cell {i} must be finite and non-negative")));
        }
        let sets = induce_boundary_sets(m, k, partition);
        let mut dirichlet = BTreeMap::new();
        for (&f, &p) in partition.dirichlet().iter().zip(face_pressure) {
            if !p.is_finite() {
                return Err(Error::Validation(format!("Dirichlet pressure on face {f} is not finite")));
            }
            let face = CellId::new(2, f);
            for q in 0..3 {
                for &i in m.closure(face, q) {
                    let v = k.vertex_of(CellId::new(q, i));
                    if let Some(old) = dirichlet.insert(v, p) {
                        if old != p {
                            return Err(Error::Validation(format!(
                                "conflicting Dirichlet pressures {old} and {p} at K vertex {v}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(FlowProblem {
            k,
            calc,
            conductivity,
            compressibility: vec![T::zero(); k.count(0)],
            sets,
            dirichlet,
            neumann_flux: vec![T::zero(); k.count(2)],
            reference: None,
            neumann_scheme: NeumannScheme::default(),
        })
    }

    pub fn with_neumann_scheme(mut self, scheme: NeumannScheme) -> Self {
        self.neumann_scheme = scheme;
        self
    }

    /// Prescribed flow rate cochain on the Neumann K 2-cells, oriented like ψ:
    /// [`FlowSolution::outward_flux`] applied to it gives the outward total.
    pub fn with_neumann_flux(mut self, flux: Vec<T>) -> Result<Self> {
        if flux.len() != self.k.count(2) {
            return Err(Error::Validation("Neumann flux must have one entry per K 2-cell".into()));
        }
        let neumann = &self.sets.neumann[2];
        if let Some(i) = (0..flux.len()).find(|&i| flux[i] != T::zero() && neumann.binary_search(&i).is_err()) {
            return Err(Error::Validation(format!("flux given on K 2-cell {i} outside the Neumann set")));
        }
        self.neumann_flux = flux;
        Ok(self)
    }

    pub fn with_compressibility(mut self, pi0: Vec<T>) -> Result<Self> {
        if pi0.len() != self.k.count(0) {
            return Err(Error::Validation("compressibility must have one entry per K 0-cell".into()));
        }
        if let Some(i) = pi0.iter().position(|c| !(c.is_finite() && *c >= T::zero())) {
            return Err(Error::Validation(format!("compressibility of K 0-cell {i} must be finite and non-negative")));
        }
        self.compressibility = pi0;
        Ok(self)
    }

    /// Pins the pressure of one K 0-cell, removing the constant kernel of pure Neumann problems.
    pub fn with_reference(mut self, vertex: usize, pressure: T) -> Result<Self> {
        if vertex >= self.k.count(0) || self.dirichlet.contains_key(&vertex) {
            return Err(Error::Validation(format!("K vertex {vertex} cannot be used as reference")));
        }
        self.reference = Some((vertex, pressure));
        Ok(self)
    }

    /// Fixed pressures: Dirichlet values plus the optional reference.
    pub fn fixed(&self) -> BTreeMap<usize, T> {
        let mut f = self.dirichlet.clone();
        if let Some((v, p)) = self.reference {
            f.insert(v, p);
        }
        f
    }

    /// `Π₁ δ₀` as an operator.
    pub fn gradient(&self) -> OperatorMatrix<T> {
        self.calc
            .coboundary(0)
            .scale_rows(&self.conductivity)
            .with_unit(PhysDim::CONDUCTIVITY)
    }

    /// Rejects problems with a pressure-connected block that touches no fixed value.
    fn check_anchored(&self) -> Result<()> {
        let n = self.k.count(0);
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (e, &c) in self.conductivity.iter().enumerate() {
            if c > T::zero() {
                let ends = self.k.faces_of(1, e);
                let (a, b) = (find(&mut parent, ends[0].0), find(&mut parent, ends[1].0));
                parent[a] = b;
            }
        }
        let mut anchored = vec![false; n];
        for &v in self.fixed().keys() {
            let r = find(&mut parent, v);
            anchored[r] = true;
        }
        for v in 0..n {
            let r = find(&mut parent, v);
            if !anchored[r] {
                return Err(Error::Singular(format!(
                    "K vertex {v} belongs to a block with no Dirichlet anchor; pin a reference pressure"
                )));
            }
        }
        Ok(())
    }
}

/// Assembled reduced system `A x = b` over the free K 0-cells.
#[derive(Clone, Debug)]
pub struct LinearSystem<T: Real> {
    pub matrix: OperatorMatrix<T>,
    pub rhs: Vec<T>,
    /// K 0-cell of each unknown.
    pub unknowns: Vec<usize>,
    pub row_kind: Vec<RowKind>,
    /// Fixed pressures eliminated from the system.
    pub fixed: BTreeMap<usize, T>,
}

impl<T: Real> LinearSystem<T> {
    /// Expands a reduced solution to a full pressure vector.
    pub fn expand(&self, x: &[T], n0: usize) -> Vec<T> {
        let mut p = vec![T::zero(); n0];
        for (&v, &val) in &self.fixed {
            p[v] = val;
        }
        for (i, &v) in self.unknowns.iter().enumerate() {
            p[v] = x[i];
        }
        p
    }
}

/// Full-space rows of both equation kinds, before elimination.
struct FullRows<T: Real> {
    laplacian: OperatorMatrix<T>,
    /// Source added to the balance rows (natural scheme).
    source: Vec<T>,
    /// Replacement rows and right-hand side at Neumann vertices (projected scheme).
    neumann: Option<(OperatorMatrix<T>, Vec<T>)>,
    is_neumann: Vec<bool>,
}

fn full_rows<T: Real>(problem: &FlowProblem<'_, T>) -> Result<FullRows<T>> {
    let k = problem.k;
    let n0 = k.count(0);
    let laplacian = MaterialLaplacian::new(problem.calc, &problem.conductivity)?.matrix;
    let gamma_n2 = &problem.sets.neumann[2];
    let star_gamma = boundary_hodge(k, gamma_n2)?;
    let density = star_gamma.apply(&problem.neumann_flux)?;

    let mut is_neumann = vec![false; n0];
    for &v in &problem.sets.neumann[0] {
        is_neumann[v] = true;
    }
    match problem.neumann_scheme {
        NeumannScheme::Natural => {
            let mut quarter_area = vec![T::zero(); n0];
            let q = T::lit(0.25);
            for &b in gamma_n2 {
                for v in k.vertices_of(2, b) {
                    quarter_area[v] = quarter_area[v] + q * k.measures(2)[b];
                }
            }
            let w0 = problem.calc.inner.weights(0);
            let outward = T::from_sign(-k.handedness());
            let source = (0..n0)
                .map(|v| {
                    if is_neumann[v] {
                        -(outward * quarter_area[v] * density[v]) / w0[v]
                    } else {
                        T::zero()
                    }
                })
                .collect();
            Ok(FullRows {
                laplacian,
                source,
                neumann: None,
                is_neumann,
            })
        }
        NeumannScheme::Projected => {
            let psi = problem.calc.star(1).matmul(&problem.gradient())?;
            let raw = star_gamma.matmul(&psi)?;
            let (mut len_sum, mut len_cnt) = (vec![T::zero(); n0], vec![0usize; n0]);
            for &e in &problem.sets.neumann[1] {
                for &(v, _) in k.faces_of(1, e) {
                    len_sum[v] = len_sum[v] + k.measures(1)[e];
                    len_cnt[v] += 1;
                }
            }
            let mut scale = vec![T::one(); n0];
            for v in 0..n0 {
                if is_neumann[v] {
                    if len_cnt[v] == 0 {
                        return Err(Error::Topology(format!("Neumann vertex {v} has no adjacent Neumann edge")));
                    }
                    scale[v] = T::lit(len_cnt[v] as f64) / len_sum[v];
                }
            }
            let rows = raw.scale_rows(&scale).with_unit(laplacian.unit());
            let rhs = density.iter().zip(&scale).map(|(&r, &s)| r * s).collect();
            Ok(FullRows {
                laplacian,
                source: vec![T::zero(); n0],
                neumann: Some((rows, rhs)),
                is_neumann,
            })
        }
    }
}

fn assemble<T: Real>(problem: &FlowProblem<'_, T>, mass: Option<(&[T], T, &[T])>) -> Result<LinearSystem<T>> {
    let k = problem.k;
    let n0 = k.count(0);
    let rows = full_rows(problem)?;
    let fixed = problem.fixed();
    let mut unknown_of = vec![usize::MAX; n0];
    let mut unknowns = Vec::with_capacity(n0 - fixed.len());
    for v in 0..n0 {
        if !fixed.contains_key(&v) {
            unknown_of[v] = unknowns.len();
            unknowns.push(v);
        }
    }
    let n = unknowns.len();
    let mut trip = Vec::new();
    let mut rhs = vec![T::zero(); n];
    let mut row_kind = Vec::with_capacity(n);
    for (i, &v) in unknowns.iter().enumerate() {
        let (src, kind) = match &rows.neumann {
            Some((neumann, nrhs)) if rows.is_neumann[v] => {
                rhs[i] = nrhs[v];
                (neumann, RowKind::Neumann)
            }
            _ => {
                rhs[i] = rows.source[v];
                (&rows.laplacian, RowKind::Conservation)
            }
        };
        row_kind.push(kind);
        for (c, a) in src.row(v) {
            if let Some(&pv) = fixed.get(&c) {
                rhs[i] = rhs[i] - a * pv;
            } else {
                trip.push((i, unknown_of[c], a));
            }
        }
        if kind == RowKind::Conservation {
            if let Some((pi0, dt, prev)) = mass {
                let m = pi0[v] / dt;
                trip.push((i, i, m));
                rhs[i] = rhs[i] + m * prev[v];
            }
        }
    }
    let space = Space::new(ComplexId::Reduced, 0);
    let matrix = OperatorMatrix::from_triplets((space, n), (space, n), trip, rows.laplacian.unit())?;
    Ok(LinearSystem {
        matrix,
        rhs,
        unknowns,
        row_kind,
        fixed,
    })
}

/// Assembles the steady system.
pub fn assemble_steady<T: Real>(problem: &FlowProblem<'_, T>) -> Result<LinearSystem<T>> {
    problem.check_anchored()?;
    assemble(problem, None)
}

/// Pressure, dual flow and flow rate cochains of a solved problem.
#[derive(Clone, Debug)]
pub struct FlowSolution<T: Real> {
    /// π⁰ (Pa).
    pub pressure: Cochain<T>,
    /// υ¹ = Π₁δ₀π⁰ (m²/s).
    pub dual_flow: Cochain<T>,
    /// ψ² = ⋆₁υ¹ (m³/s).
    pub flow_rate: Cochain<T>,
    /// Relative residual of the reduced system.
    pub residual: T,
}

impl<T: Real> FlowSolution<T> {
    /// Builds υ and ψ from a full pressure vector.
    pub fn from_pressure(problem: &FlowProblem<'_, T>, pressure: Vec<T>, residual: T) -> Result<Self> {
        let pressure = Cochain::new(Space::new(ComplexId::Forman, 0), pressure, PhysDim::PRESSURE);
        let dual_flow = pressure.map_by(&problem.gradient())?;
        let mut flow_rate = dual_flow.map_by(problem.calc.star(1))?;
        flow_rate.unit = PhysDim::FLOW_RATE;
        Ok(FlowSolution {
            pressure,
            dual_flow,
            flow_rate,
            residual,
        })
    }

    /// Outward flow rate through the given boundary faces of M (m³/s).
    ///
    /// Sums ψ over the boundary K 2-cells `(f → b)` of each face with the
    /// orientation induced from K and the geometric handedness of K, so that
    /// fluid leaving the domain counts positive.
    pub fn outward_flux(&self, k: &FormanComplex<T>, faces: &[usize]) -> Result<T> {
        let mut faces = faces.to_vec();
        faces.sort_unstable();
        let sign = T::from_sign(-k.handedness());
        let mut total = T::zero();
        for (i, c) in k.cells(2).iter().enumerate() {
            if c.upper.dim == 2 && faces.binary_search(&c.upper.index).is_ok() {
                let s = k
                    .induced_boundary_sign(i)
                    .ok_or_else(|| Error::Validation(format!("face {} is not on the boundary", c.upper.index)))?;
                total = total + sign * T::from_sign(s) * self.flow_rate.values[i];
            }
        }
        Ok(total)
    }

    /// Outward flow rate per face of M, for the given faces.
    pub fn face_fluxes(&self, k: &FormanComplex<T>, faces: &[usize]) -> Result<Vec<(usize, T)>> {
        faces
            .iter()
            .map(|&f| Ok((f, self.outward_flux(k, &[f])?)))
            .collect()
    }
}

/// Solves the steady problem.
pub fn solve_steady<T: Real>(problem: &FlowProblem<'_, T>, opts: &SolveOptions) -> Result<FlowSolution<T>> {
    let sys = assemble_steady(problem)?;
    let (x, res) = if sys.unknowns.is_empty() {
        (Vec::new(), T::zero())
    } else {
        SparseLu::new(&sys.matrix)?.solve(&sys.rhs, opts)?
    };
    FlowSolution::from_pressure(problem, sys.expand(&x, problem.k.count(0)), res)
}

/// Implicit Euler stepper with a factorization reused across steps.
pub struct TransientSolver<'p, 'a, T: Real> {
    problem: &'p FlowProblem<'a, T>,
    dt: T,
    system: LinearSystem<T>,
    lu: SparseLu<T>,
    opts: SolveOptions,
}

impl<'p, 'a, T: Real> TransientSolver<'p, 'a, T> {
    pub fn new(problem: &'p FlowProblem<'a, T>, dt: T, opts: SolveOptions) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::Validation(format!("time step must be positive, got {dt}")));
        }
        problem.check_anchored()?;
        let zero = vec![T::zero(); problem.k.count(0)];
        let system = assemble(problem, Some((&problem.compressibility, dt, &zero)))?;
        for (i, &v) in system.unknowns.iter().enumerate() {
            if system.row_kind[i] == RowKind::Conservation && !(problem.compressibility[v] > T::zero()) {
                return Err(Error::Validation(format!(
                    "compressibility is zero at unknown K vertex {v}; transient step undefined"
                )));
            }
        }
        let lu = SparseLu::new(&system.matrix)?;
        Ok(TransientSolver {
            problem,
            dt,
            system,
            lu,
            opts,
        })
    }

    /// One implicit Euler step from the full pressure vector `prev`.
    pub fn step(&self, prev: &[T]) -> Result<Vec<T>> {
        let n0 = self.problem.k.count(0);
        if prev.len() != n0 {
            return Err(Error::Validation("pressure vector length differs from K 0-cell count".into()));
        }
        let base = assemble_rhs_shift(&self.system, self.problem, self.dt, prev);
        let (x, _) = if self.system.unknowns.is_empty() {
            (Vec::new(), T::zero())
        } else {
            self.lu.solve(&base, &self.opts)?
        };
        Ok(self.system.expand(&x, n0))
    }

    /// Steps until `‖π^{n+1} − π^n‖∞ / Δt ≤ tol · max|Dirichlet data|`.
    pub fn run_to_steady(&self, mut p: Vec<T>, tol: T, max_steps: usize) -> Result<(Vec<T>, usize)> {
        let scale = self
            .problem
            .fixed()
            .values()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::min_positive_value());
        for n in 1..=max_steps {
            let next = self.step(&p)?;
            let change = next
                .iter()
                .zip(&p)
                .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
            p = next;
            if change / self.dt <= tol * scale {
                return Ok((p, n));
            }
        }
        Err(Error::Numeric {
            message: format!("transient run did not settle within {max_steps} steps"),
            residual: f64::NAN,
        })
    }
}

/// Right-hand side of the stepped system: steady part plus `Π₀/Δt · π^n` on conservation rows.
fn assemble_rhs_shift<T: Real>(sys: &LinearSystem<T>, problem: &FlowProblem<'_, T>, dt: T, prev: &[T]) -> Vec<T> {
    sys.rhs
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let v = sys.unknowns[i];
            if sys.row_kind[i] == RowKind::Conservation {
                r + problem.compressibility[v] / dt * prev[v]
            } else {
                r
            }
        })
        .collect()
}

/// Solves `(Π₀/Δt + Δ̃₀) π^{n+1} = (Π₀/Δt) π^n` with the steady boundary rows.
pub fn step_transient<T: Real>(problem: &FlowProblem<'_, T>, prev: &[T], dt: T, opts: &SolveOptions) -> Result<Vec<T>> {
    TransientSolver::new(problem, dt, *opts)?.step(prev)
}

/// Emergent hydraulic conductivity and permeability of a pressure-drop experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Permeability {
    /// Flow rate magnitude (m³/s).
    pub flow_rate: f64,
    /// K = Q L / ((p₂ − p₁) A) (m³·s/kg).
    pub conductivity: f64,
    /// k = K μ (m²).
    pub permeability: f64,
}

/// `K = Q·L/((p₂−p₁)·A)` and `k = K·μ`.
pub fn permeability(q: f64, length: f64, area: f64, p1: f64, p2: f64, viscosity: f64) -> Result<Permeability> {
    let dp = p2 - p1;
    if dp == 0.0 || !dp.is_finite() {
        return Err(Error::Validation("pressure difference must be nonzero".into()));
    }
    if !(area > 0.0 && length > 0.0 && viscosity > 0.0) {
        return Err(Error::Validation("length, area and viscosity must be positive".into()));
    }
    let conductivity = q.abs() * length / (dp.abs() * area);
    Ok(Permeability {
        flow_rate: q.abs(),
        conductivity,
        permeability: conductivity * viscosity,
    })
}

/// Coordinate axis of a pressure-drop experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

/// Faces and dimensions of a two-face pressure-drop experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureDropFaces {
    /// Boundary faces whose outward normal points along −axis (high pressure p₂).
    pub inlet: Vec<usize>,
    /// Boundary faces whose outward normal points along +axis (low pressure p₁).
    pub outlet: Vec<usize>,
    /// Sample length along the axis (m).
    pub length: f64,
    /// Cross-section area, the total inlet face area (m²).
    pub area: f64,
}

/// Selects inlet and outlet faces whose outward normals lie within
/// `max_angle_deg` of ∓axis.
pub fn pressure_drop_faces<T: Real>(m: &CellComplex<T>, axis: Axis, max_angle_deg: f64) -> Result<PressureDropFaces> {
    let a = axis.index();
    let cos_min = max_angle_deg.to_radians().cos();
    let (mut inlet, mut outlet) = (Vec::new(), Vec::new());
    let mut area = 0.0;
    for (f, _) in m.boundary_subcomplex().faces {
        let n = m.outward_normal(f).expect("boundary face");
        let c = n[a].to_f64_lossy();
        if c <= -cos_min {
            inlet.push(f);
            area += m.measure(CellId::new(2, f)).to_f64_lossy();
        } else if c >= cos_min {
            outlet.push(f);
        }
    }
    if inlet.is_empty() || outlet.is_empty() {
        return Err(Error::Validation(format!(
            "no opposite boundary faces normal to the {} axis",
            axis.name()
        )));
    }
    let (lo, hi) = m.bounding_box();
    Ok(PressureDropFaces {
        inlet,
        outlet,
        length: (hi[a] - lo[a]).to_f64_lossy(),
        area,
    })
}

/// Pressure-drop problem: `p2` on the inlet, `p1` on the outlet, other faces insulated.
pub fn pressure_drop_problem<'a, T: Real>(
    m: &CellComplex<T>,
    k: &'a FormanComplex<T>,
    calc: &'a DiscreteCalculus<T>,
    faces: &PressureDropFaces,
    p2: T,
    p1: T,
    conductivity: Vec<T>,
) -> Result<FlowProblem<'a, T>> {
    let mut dirichlet = faces.inlet.clone();
    dirichlet.extend(&faces.outlet);
    let mut values = vec![p2; faces.inlet.len()];
    values.extend(std::iter::repeat_n(p1, faces.outlet.len()));
    let mut order: Vec<usize> = (0..dirichlet.len()).collect();
    order.sort_by_key(|&i| dirichlet[i]);
    let sorted_faces: Vec<usize> = order.iter().map(|&i| dirichlet[i]).collect();
    let sorted_values: Vec<T> = order.iter().map(|&i| values[i]).collect();
    let partition = BoundaryPartition::with_dirichlet(m, sorted_faces)?;
    FlowProblem::new(m, k, calc, &partition, &sorted_values, conductivity)
}
