//! Sparse direct solves through faer's LU with iterative refinement.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::OperatorMatrix;

/// Settings for [`SparseLu::solve`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Required `‖Ax − b‖∞ / ‖b‖∞`.
    pub tolerance: f64,
    /// Maximum iterative refinement sweeps after the first solve.
    pub refinement_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-10,
            refinement_steps: 3,
        }
    }
}

/// A factorized square operator.
pub struct SparseLu<T: Real> {
    a: OperatorMatrix<T>,
    lu: Lu<usize, T>,
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

impl<T: Real> SparseLu<T> {
    pub fn new(a: &OperatorMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Usage(format!("LU needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
        }
        let trip: Vec<Triplet<usize, usize, T>> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, T>::try_new_from_triplets(a.nrows(), a.ncols(), &trip)
            .map_err(|e| Error::Numeric {
                message: format!("sparse matrix assembly failed: {e:?}"),
                residual: f64::NAN,
            })?;
        let lu = mat.sp_lu().map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
        Ok(SparseLu { a: a.clone(), lu })
    }

    pub fn matrix(&self) -> &OperatorMatrix<T> {
        &self.a
    }

    fn raw_solve(&self, b: &[T]) -> Vec<T> {
        let rhs = Col::<T>::from_fn(b.len(), |i| b[i]);
        let x = self.lu.solve(&rhs);
        (0..b.len()).map(|i| x[i]).collect()
    }

    /// Relative residual of `x` for right-hand side `b`.
    pub fn residual(&self, x: &[T], b: &[T]) -> Result<T> {
        let ax = self.a.apply(x)?;
        let r: Vec<T> = ax.iter().zip(b).map(|(&p, &q)| p - q).collect();
        let nb = inf_norm(b);
        let scale = if nb > T::zero() { nb } else { inf_norm(&ax).max(T::min_positive_value()) };
        Ok(inf_norm(&r) / scale)
    }

    /// Solves `Ax = b` and refines until the residual meets the tolerance.
    pub fn solve(&self, b: &[T], opts: &SolveOptions) -> Result<(Vec<T>, T)> {
        let mut x = self.raw_solve(b);
        let tol = T::lit(opts.tolerance);
        let mut res = self.residual(&x, b)?;
        let mut steps = 0;
        while !(res <= tol) && steps < opts.refinement_steps && x.iter().all(|v| v.is_finite()) {
            let ax = self.a.apply(&x)?;
            let r: Vec<T> = b.iter().zip(&ax).map(|(&p, &q)| p - q).collect();
            let dx = self.raw_solve(&r);
            let cand: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + d).collect();
            let cres = self.residual(&cand, b)?;
            if !(cres < res) {
                break;
            }
            x = cand;
            res = cres;
            steps += 1;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("solution contains non-finite values".into()));
        }
        if !(res <= tol) {
            return Err(Error::Numeric {
                message: format!("linear solve did not reach tolerance {:e}", opts.tolerance),
                residual: res.to_f64_lossy(),
            });
        }
        Ok((x, res))
    }
}
