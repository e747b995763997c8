//! Metric operators on cochains of K.
//!
//! The cup product is evaluated cube by cube. On a chart face `F` with free
//! set `D` it averages the cubical front/back product over the `2^|D|`
//! corners of `F`, so no corner of a quasi-cube is preferred.

use log::warn;

use crate::error::{Error, Result};
use crate::forman::{chart_decode, shuffle_sign, FormanComplex, QuasiCube};
use crate::scalar::{Real, Ring};
use crate::sparse::{ComplexId, OperatorMatrix, Space};
use crate::units::PhysDim;

/// Weight used when a cell has no orthogonal partner.
pub const WEIGHT_FLOOR: f64 = 1e-30;

fn k_space(p: usize) -> Space {
    Space::new(ComplexId::Forman, p)
}

fn subsets(mask: u8) -> impl Iterator<Item = u8> {
    (0..8u8).filter(move |s| s & !mask == 0)
}

fn length_pow(e: i32) -> PhysDim {
    PhysDim::new(0, e as i8, 0)
}

/// One term `sign · τ(left) · σ(right)` contributing to `(τ ⌣ σ)(target)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CupTerm {
    pub target: usize,
    pub left: usize,
    pub right: usize,
    pub sign: i8,
}

/// Terms of the product of a `p`- and a `q`-cochain on the face `code` of a quasi-cube.
pub fn cup_terms_in_chart(cube: &QuasiCube, code: usize, p: usize, q: usize) -> Vec<CupTerm> {
    let (ones, free) = chart_decode(code);
    let target = cube.face(ones, free);
    debug_assert_eq!(target.dim, p + q);
    let mut out = Vec::new();
    for v in subsets(free) {
        for i_set in subsets(free).filter(|s| s.count_ones() as usize == p) {
            let j_set = free & !i_set;
            let front = cube.face(ones | (v & j_set), i_set);
            let back = cube.face(ones | (i_set & !v), j_set);
            let sign = shuffle_sign(i_set, j_set) * front.orientation * back.orientation * target.orientation;
            out.push(CupTerm {
                target: target.index,
                left: front.index,
                right: back.index,
                sign,
            });
        }
    }
    out
}

/// Pairs `(c_p, b_{3−p})` of topologically orthogonal cells.
pub fn orthogonal_pairs<T>(k: &FormanComplex<T>, p: usize) -> Vec<(usize, usize)> {
    assert!(p <= 3, "dimension out of range");
    let mut out = Vec::with_capacity(k.quasi_cubes().len() * 8 * [1, 3, 3, 1][p]);
    for cube in k.quasi_cubes() {
        for j_set in subsets(0b111).filter(|s| s.count_ones() as usize == p) {
            let i_set = 0b111 & !j_set;
            for v in 0..8u8 {
                let c = cube.face(v & i_set, j_set);
                let b = cube.face(v & j_set, i_set);
                out.push((c.index, b.index));
            }
        }
    }
    out
}

/// Diagonal inner products on the cochains of K.
#[derive(Clone, Debug)]
pub struct InnerProduct<T> {
    weights: [Vec<T>; 4],
}

impl<T: Real> InnerProduct<T> {
    /// `w_p(c) = Σ_{b ⊥ c} μ(b) / (8 μ(c))`.
    pub fn new(k: &FormanComplex<T>) -> Result<Self> {
        let eighth = T::lit(0.125);
        let mut weights: [Vec<T>; 4] = Default::default();
        for p in 0..4 {
            let mu_c = k.measures(p);
            let mu_b = k.measures(3 - p);
            let mut w = vec![T::zero(); k.count(p)];
            for (c, b) in orthogonal_pairs(k, p) {
                w[c] = w[c] + mu_b[b];
            }
            for (i, wi) in w.iter_mut().enumerate() {
                if mu_c[i] <= T::zero() {
                    return Err(Error::Degeneracy {
                        dim: p,
                        index: i,
                        measure: mu_c[i].to_f64_lossy(),
                        threshold: crate::complex::MIN_MEASURE,
                    });
                }
                if *wi > T::zero() {
                    *wi = *wi * eighth / mu_c[i];
                } else {
                    warn!("K {p}-cell {i} has no orthogonal partner; weight floored at {WEIGHT_FLOOR:e}");
                    *wi = T::lit(WEIGHT_FLOOR);
                }
            }
            weights[p] = w;
        }
        Ok(InnerProduct { weights })
    }

    pub fn weights(&self, p: usize) -> &[T] {
        &self.weights[p]
    }

    /// Physical dimension of `w_p`.
    pub fn unit(p: usize) -> PhysDim {
        length_pow(3 - 2 * p as i32)
    }

    /// `⟨a, b⟩_p`.
    pub fn inner(&self, p: usize, a: &[T], b: &[T]) -> T {
        self.weights[p]
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&w, (&x, &y))| w * x * y)
            .sum()
    }

    /// `W_p` as a diagonal operator.
    pub fn matrix(&self, p: usize) -> OperatorMatrix<T> {
        OperatorMatrix::diagonal(k_space(p), &self.weights[p], Self::unit(p))
    }
}

/// Sparse trilinear form of the cup product `C^p × C^q → C^{p+q}`.
#[derive(Clone, Debug)]
pub struct CupProduct {
    p: usize,
    q: usize,
    target_count: usize,
    terms: Vec<CupTerm>,
}

impl CupProduct {
    pub fn new<T>(k: &FormanComplex<T>, p: usize, q: usize) -> Result<Self> {
        if p + q > 3 {
            return Err(Error::Usage(format!("cup product needs p + q ≤ 3, got {p} + {q}")));
        }
        let n = k.count(p + q);
        if n > 0 && k.quasi_cubes().is_empty() {
            return Err(Error::Topology("cup product requires quasi-cube charts".into()));
        }
        let mut terms = Vec::with_capacity(n << (p + q));
        for i in 0..n {
            let (cube, code) = k.home_chart(p + q, i);
            terms.extend(cup_terms_in_chart(&k.quasi_cubes()[cube], code, p, q));
        }
        Ok(CupProduct {
            p,
            q,
            target_count: n,
            terms,
        })
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn terms(&self) -> &[CupTerm] {
        &self.terms
    }

    /// Each term carries weight `sign / denominator()`.
    pub fn denominator(&self) -> u32 {
        1 << (self.p + self.q)
    }

    /// `τ ⌣ σ`. The scalar must support exact division by powers of two.
    pub fn apply<R: Ring>(&self, tau: &[R], sigma: &[R]) -> Vec<R> {
        let mut out = vec![R::zero(); self.target_count];
        for t in &self.terms {
            let prod = tau[t.left] * sigma[t.right];
            out[t.target] = if t.sign > 0 {
                out[t.target] + prod
            } else {
                out[t.target] - prod
            };
        }
        let two = R::one() + R::one();
        let mut den = R::one();
        for _ in 0..self.p + self.q {
            den = den * two;
        }
        out.into_iter().map(|x| x / den).collect()
    }
}

/// Evaluation on the fundamental class: the sum over all 3-cells.
pub fn fundamental_class<R: Ring>(c3: &[R]) -> R {
    c3.iter().fold(R::zero(), |a, &b| a + b)
}

/// Hodge stars `⋆_p : C^p → C^{3−p}` for all p.
#[derive(Clone, Debug)]
pub struct HodgeStar<T> {
    stars: [OperatorMatrix<T>; 4],
}

impl<T: Real> HodgeStar<T> {
    /// `⋆_p = W_{3−p}⁻¹ C_p` with `C_p[b, c] = (b ⌣ c)[K]`.
    pub fn new(k: &FormanComplex<T>, ip: &InnerProduct<T>) -> Result<Self> {
        let mut stars = Vec::with_capacity(4);
        let eighth = T::lit(0.125);
        for p in 0..4 {
            let cup = CupProduct::new(k, 3 - p, p)?;
            let w = ip.weights(3 - p);
            let trip = cup
                .terms()
                .iter()
                .map(|t| (t.left, t.right, T::from_sign(t.sign) * eighth / w[t.left]))
                .collect();
            stars.push(OperatorMatrix::from_triplets(
                (k_space(3 - p), k.count(3 - p)),
                (k_space(p), k.count(p)),
                trip,
                InnerProduct::<T>::unit(3 - p).inv(),
            )?);
        }
        let stars: [OperatorMatrix<T>; 4] = stars.try_into().expect("four stars");
        Ok(HodgeStar { stars })
    }

    pub fn star(&self, p: usize) -> &OperatorMatrix<T> {
        &self.stars[p]
    }
}

/// `δ*_p = W_{p−1}⁻¹ ∂_p W_p`.
pub fn adjoint_coboundary<T: Real>(
    k: &FormanComplex<T>,
    ip: &InnerProduct<T>,
    p: usize,
) -> Result<OperatorMatrix<T>> {
    if !(1..=3).contains(&p) {
        return Err(Error::Usage(format!("adjoint coboundary defined for p in 1..=3, got {p}")));
    }
    let inv: Vec<T> = ip.weights(p - 1).iter().map(|&w| T::one() / w).collect();
    Ok(k
        .boundary_matrix::<T>(p)?
        .scale_rows(&inv)
        .scale_cols(ip.weights(p))
        .with_unit(length_pow(-2)))
}

/// All operators of the discrete de Rham complex on K.
#[derive(Clone, Debug)]
pub struct DiscreteCalculus<T> {
    pub inner: InnerProduct<T>,
    pub hodge: HodgeStar<T>,
    coboundary: [OperatorMatrix<T>; 3],
    adjoint: [OperatorMatrix<T>; 3],
}

impl<T: Real> DiscreteCalculus<T> {
    pub fn new(k: &FormanComplex<T>) -> Result<Self> {
        let inner = InnerProduct::new(k)?;
        let hodge = HodgeStar::new(k, &inner)?;
        let coboundary = [
            k.coboundary_matrix::<T>(0)?,
            k.coboundary_matrix::<T>(1)?,
            k.coboundary_matrix::<T>(2)?,
        ];
        let adjoint = [
            adjoint_coboundary(k, &inner, 1)?,
            adjoint_coboundary(k, &inner, 2)?,
            adjoint_coboundary(k, &inner, 3)?,
        ];
        Ok(DiscreteCalculus {
            inner,
            hodge,
            coboundary,
            adjoint,
        })
    }

    /// δ_p for p in 0..=2.
    pub fn coboundary(&self, p: usize) -> &OperatorMatrix<T> {
        &self.coboundary[p]
    }

    /// δ*_p for p in 1..=3.
    pub fn adjoint(&self, p: usize) -> &OperatorMatrix<T> {
        &self.adjoint[p - 1]
    }

    pub fn star(&self, p: usize) -> &OperatorMatrix<T> {
        self.hodge.star(p)
    }
}

/// `Δ̃₀ = δ*₁ Π₁ δ₀`.
#[derive(Clone, Debug)]
pub struct MaterialLaplacian<T> {
    pub matrix: OperatorMatrix<T>,
}

impl<T: Real> MaterialLaplacian<T> {
    pub fn new(calc: &DiscreteCalculus<T>, conductivity: &[T]) -> Result<Self> {
        let d0 = calc.coboundary(0);
        if conductivity.len() != d0.nrows() {
            return Err(Error::Validation(format!(
                "conductivity has {} entries, K has {} 1-cells",
                conductivity.len(),
                d0.nrows()
            )));
        }
        if let Some(i) = conductivity.iter().position(|&c| !(c >= T::zero()) || !c.is_finite()) {
            return Err(Error::Validation(format!(
                "conductivity of K 1-cell {i} is {} (must be finite and non-negative)",
                conductivity[i]
            )));
        }
        let matrix = calc
            .adjoint(1)
            .scale_cols(conductivity)
            .matmul(d0)?
            .with_unit(length_pow(-2).mul(PhysDim::CONDUCTIVITY));
        Ok(MaterialLaplacian { matrix })
    }
}
