//! Compressed sparse row operators over cochain bases.

use crate::error::{Error, Result};
use crate::scalar::{Real, Ring};
use crate::units::PhysDim;

/// Which complex a cochain basis lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComplexId {
    /// The material complex M.
    Material,
    /// The Forman subdivision K.
    Forman,
    /// Unknowns of a reduced linear system.
    Reduced,
}

/// A cochain basis: a complex and a dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub complex: ComplexId,
    pub dim: usize,
}

impl Space {
    pub const fn new(complex: ComplexId, dim: usize) -> Self {
        Space { complex, dim }
    }
}

/// Sparse matrix mapping cochains of `cols` to cochains of `rows`.
///
/// Entries are stored row-major with sorted, unique column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<T> {
    rows: Space,
    cols: Space,
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    unit: PhysDim,
}

impl<T: Ring> OperatorMatrix<T> {
    /// Assembles from triplets. Duplicates are summed in input order and
    /// entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        rows: (Space, usize),
        cols: (Space, usize),
        mut triplets: Vec<(usize, usize, T)>,
        unit: PhysDim,
    ) -> Result<Self> {
        let (nrows, ncols) = (rows.1, cols.1);
        for &(r, c, _) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::Usage(format!(
                    "triplet ({r}, {c}) outside a {nrows}x{ncols} operator"
                )));
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            i += 1;
            while i < triplets.len() && triplets[i].0 == r && triplets[i].1 == c {
                v = v + triplets[i].2;
                i += 1;
            }
            if !v.is_zero() {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(OperatorMatrix {
            rows: rows.0,
            cols: cols.0,
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            unit,
        })
    }

    /// Diagonal operator on a single space.
    pub fn diagonal(space: Space, diag: &[T], unit: PhysDim) -> Self {
        let n = diag.len();
        let trip = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets((space, n), (space, n), trip, unit).expect("in-bounds diagonal")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row_space(&self) -> Space {
        self.rows
    }

    pub fn col_space(&self) -> Space {
        self.cols
    }

    pub fn unit(&self) -> PhysDim {
        self.unit
    }

    pub fn with_unit(mut self, unit: PhysDim) -> Self {
        self.unit = unit;
        self
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn transpose(&self) -> Self {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets((self.cols, self.ncols), (self.rows, self.nrows), trip, self.unit)
            .expect("transpose stays in bounds")
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.ncols {
            return Err(Error::Usage(format!(
                "operator expects {} entries, got {}",
                self.ncols,
                x.len()
            )));
        }
        Ok((0..self.nrows)
            .map(|r| self.row(r).fold(T::zero(), |acc, (c, v)| acc + v * x[c]))
            .collect())
    }

    /// Sparse product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.ncols != rhs.nrows {
            return Err(Error::Usage(format!(
                "cannot compose {}x{} with {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let mut acc = vec![T::zero(); rhs.ncols];
        let mut mark = vec![usize::MAX; rhs.ncols];
        let mut touched = Vec::new();
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = T::zero();
                        touched.push(c);
                    }
                    acc[c] = acc[c] + a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                trip.push((r, c, acc[c]));
            }
        }
        Self::from_triplets(
            (self.rows, self.nrows),
            (rhs.cols, rhs.ncols),
            trip,
            self.unit.mul(rhs.unit),
        )
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.nrows, "row scale length");
        let trip = self.triplets().map(|(r, c, v)| (r, c, d[r] * v)).collect();
        Self::from_triplets((self.rows, self.nrows), (self.cols, self.ncols), trip, self.unit)
            .expect("same shape")
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.ncols, "column scale length");
        let trip = self.triplets().map(|(r, c, v)| (r, c, v * d[c])).collect();
        Self::from_triplets((self.rows, self.nrows), (self.cols, self.ncols), trip, self.unit)
            .expect("same shape")
    }

    /// Entry-wise conversion into another scalar type.
    pub fn map<U: Ring>(&self, f: impl Fn(T) -> U) -> OperatorMatrix<U> {
        let trip = self.triplets().map(|(r, c, v)| (r, c, f(v))).collect();
        OperatorMatrix::from_triplets((self.rows, self.nrows), (self.cols, self.ncols), trip, self.unit)
            .expect("same shape")
    }

    /// Row-major dense copy, for small oracles and debugging.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// The set of `(row, col)` positions holding nonzeros.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        self.triplets().map(|(r, c, _)| (r, c)).collect()
    }
}

impl<T: Real> OperatorMatrix<T> {
    /// Largest absolute entry, zero for an empty operator.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// Largest absolute entry of `self − other` over the union of patterns.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut m = T::zero();
        for (r, c, v) in self.triplets() {
            m = m.max((v - other.get(r, c)).abs());
        }
        for (r, c, v) in other.triplets() {
            m = m.max((v - self.get(r, c)).abs());
        }
        m
    }
}
