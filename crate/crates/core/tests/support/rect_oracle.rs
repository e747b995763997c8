//! Dense finite-volume oracle for rectilinear hexahedral grids.
//!
//! The subdivision of a rectilinear grid is the grid refined at cell
//! midpoints, so every quasi-cube is an axis-aligned box. Weights follow from
//! box geometry alone: `w₀(v) = Σ vol/8` over boxes at `v`, and each box edge
//! of length `l` gets `A/(4l)` where `A` is the box face area normal to it.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub struct RectOracle {
    /// Refined coordinates per axis.
    pub axes: [Vec<f64>; 3],
    pub w0: Vec<f64>,
    /// `(a, b, axis, length, w1)` with `b` one step above `a` along `axis`.
    pub edges: Vec<(usize, usize, usize, f64, f64)>,
}

fn refine(xs: &[f64]) -> Vec<f64> {
    let mut out = vec![xs[0]];
    for w in xs.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
        out.push(w[1]);
    }
    out
}

impl RectOracle {
    pub fn new(xs: &[f64], ys: &[f64], zs: &[f64]) -> Self {
        let axes = [refine(xs), refine(ys), refine(zs)];
        let n = [axes[0].len(), axes[1].len(), axes[2].len()];
        let id = |i: [usize; 3]| (i[2] * n[1] + i[1]) * n[0] + i[0];
        let mut w0 = vec![0.0; n[0] * n[1] * n[2]];
        let mut w1 = std::collections::HashMap::new();
        for k in 0..n[2] - 1 {
            for j in 0..n[1] - 1 {
                for i in 0..n[0] - 1 {
                    let lo = [i, j, k];
                    let d = [0, 1, 2].map(|a| axes[a][lo[a] + 1] - axes[a][lo[a]]);
                    let vol = d[0] * d[1] * d[2];
                    for c in 0..8 {
                        let v = [lo[0] + (c & 1), lo[1] + ((c >> 1) & 1), lo[2] + ((c >> 2) & 1)];
                        w0[id(v)] += vol / 8.0;
                    }
                    for a in 0..3 {
                        let area = vol / d[a];
                        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                        for s in 0..4 {
                            let mut v = lo;
                            v[b] += s & 1;
                            v[c] += s >> 1;
                            let mut u = v;
                            u[a] += 1;
                            *w1.entry((id(v), id(u), a)).or_insert(0.0) += area / (4.0 * d[a]);
                        }
                    }
                }
            }
        }
        let mut edges: Vec<_> = w1
            .into_iter()
            .map(|((a, b, ax), w)| {
                let len = {
                    let ia = Self::unflatten(a, n)[ax];
                    axes[ax][ia + 1] - axes[ax][ia]
                };
                (a, b, ax, len, w)
            })
            .collect();
        edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        RectOracle { axes, w0, edges }
    }

    fn dims(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    fn unflatten(v: usize, n: [usize; 3]) -> [usize; 3] {
        [v % n[0], (v / n[0]) % n[1], v / (n[0] * n[1])]
    }

    pub fn len(&self) -> usize {
        self.w0.len()
    }

    pub fn point(&self, v: usize) -> [f64; 3] {
        let i = Self::unflatten(v, self.dims());
        [self.axes[0][i[0]], self.axes[1][i[1]], self.axes[2][i[2]]]
    }

    /// Oracle vertex nearest to `p`.
    pub fn locate(&self, p: [f64; 3]) -> usize {
        let n = self.dims();
        let i = [0, 1, 2].map(|a| {
            let ax = &self.axes[a];
            (0..ax.len())
                .min_by(|&x, &y| (ax[x] - p[a]).abs().total_cmp(&(ax[y] - p[a]).abs()))
                .unwrap()
        });
        (i[2] * n[1] + i[1]) * n[0] + i[0]
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 3] {
        let (a, b, ..) = self.edges[e];
        let (p, q) = (self.point(a), self.point(b));
        [0, 1, 2].map(|i| 0.5 * (p[i] + q[i]))
    }

    /// `δ₀ᵀ W₁ Π δ₀` over all vertices.
    pub fn stiffness(&self, pi: &[f64]) -> DMatrix<f64> {
        let n = self.len();
        let mut l = DMatrix::zeros(n, n);
        for (e, &(a, b, _, _, w)) in self.edges.iter().enumerate() {
            let g = w * pi[e];
            l[(a, a)] += g;
            l[(b, b)] += g;
            l[(a, b)] -= g;
            l[(b, a)] -= g;
        }
        l
    }

    /// Pressure-drop solve along `axis`: `p2` at the low end, `p1` at the high end.
    pub fn pressure_drop(&self, pi: &[f64], axis: usize, p2: f64, p1: f64) -> OracleSolution {
        let n = self.len();
        let lo = self.axes[axis][0];
        let hi = *self.axes[axis].last().unwrap();
        let fixed: Vec<Option<f64>> = (0..n)
            .map(|v| {
                let x = self.point(v)[axis];
                if x == lo {
                    Some(p2)
                } else if x == hi {
                    Some(p1)
                } else {
                    None
                }
            })
            .collect();
        let l = self.stiffness(pi);
        let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
        let mut a = DMatrix::zeros(free.len(), free.len());
        let mut b = DVector::zeros(free.len());
        for (r, &v) in free.iter().enumerate() {
            for (c, &u) in free.iter().enumerate() {
                a[(r, c)] = l[(v, u)] / self.w0[v];
            }
            for u in 0..n {
                if let Some(p) = fixed[u] {
                    b[r] -= l[(v, u)] / self.w0[v] * p;
                }
            }
        }
        let x = a.clone().lu().solve(&b).expect("oracle system is nonsingular");
        let mut pressure: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (r, &v) in free.iter().enumerate() {
            pressure[v] = x[r];
        }
        OracleSolution {
            free,
            matrix: a,
            rhs: b,
            pressure,
        }
    }

    /// Outward flow through the face `axis = hi` (or `lo`): per boundary box
    /// face, area times the corner mean of `Π·(p_inner − p_face)/l`.
    pub fn face_outflow(&self, pi: &[f64], pressure: &[f64], axis: usize, high: bool) -> f64 {
        let n = self.dims();
        let last = n[axis] - 1;
        let face_i = if high { last } else { 0 };
        let inner_i = if high { last - 1 } else { 1 };
        let edge_of = |v: usize, u: usize| {
            let key = if v < u { (v, u) } else { (u, v) };
            self.edges
                .binary_search_by(|e| (e.0, e.1).cmp(&key))
                .expect("edge")
        };
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut total = 0.0;
        for jb in 0..n[b] - 1 {
            for jc in 0..n[c] - 1 {
                let area = (self.axes[b][jb + 1] - self.axes[b][jb]) * (self.axes[c][jc + 1] - self.axes[c][jc]);
                let mut mean = 0.0;
                for s in 0..4 {
                    let mut f = [0; 3];
                    f[axis] = face_i;
                    f[b] = jb + (s & 1);
                    f[c] = jc + (s >> 1);
                    let mut g = f;
                    g[axis] = inner_i;
                    let (fv, gv) = (
                        (f[2] * n[1] + f[1]) * n[0] + f[0],
                        (g[2] * n[1] + g[1]) * n[0] + g[0],
                    );
                    let e = edge_of(fv, gv);
                    mean += pi[e] * (pressure[gv] - pressure[fv]) / self.edges[e].3 / 4.0;
                }
                total += area * mean;
            }
        }
        total
    }
}

pub struct OracleSolution {
    /// Oracle vertex of each unknown.
    pub free: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub pressure: Vec<f64>,
}
