//! Scalar abstractions.
//!
//! Topology and cup products only need ring arithmetic, so they are generic
//! over [`Ring`] and can be evaluated exactly over rationals or integers.
//! Geometry, metric operators and the flow solver need [`Real`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num};

/// Commutative ring arithmetic sufficient for incidence algebra.
pub trait Ring: Num + Copy + Debug + Send + Sync + 'static {
    /// Converts a relative orientation (±1) into the ring.
    fn from_sign(sign: i8) -> Self {
        if sign >= 0 {
            Self::one()
        } else {
            Self::zero() - Self::one()
        }
    }
}

impl<T: Num + Copy + Debug + Send + Sync + 'static> Ring for T {}

/// Floating point scalar used for geometry and numerics.
pub trait Real:
    Ring
    + Float
    + FromPrimitive
    + Display
    + LowerExp
    + Sum
    + Default
    + faer::traits::RealField
{
    /// Machine-independent conversion from `f64` literals.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("representable literal")
    }

    /// Lossy conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Three-component vector helpers on plain arrays.
pub(crate) mod vec3 {
    use super::Real;

    pub fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn add<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn scale<T: Real>(a: [T; 3], s: T) -> [T; 3] {
        [a[0] * s, a[1] * s, a[2] * s]
    }

    pub fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn norm<T: Real>(a: [T; 3]) -> T {
        dot(a, a).sqrt()
    }

    pub fn dist<T: Real>(a: [T; 3], b: [T; 3]) -> T {
        norm(sub(a, b))
    }

    pub fn mean<T: Real>(points: impl IntoIterator<Item = [T; 3]>) -> [T; 3] {
        let mut acc = [T::zero(); 3];
        let mut n = 0usize;
        for p in points {
            acc = add(acc, p);
            n += 1;
        }
        scale(acc, T::one() / T::lit(n.max(1) as f64))
    }

    /// Area of triangle `abc`.
    pub fn tri_area<T: Real>(a: [T; 3], b: [T; 3], c: [T; 3]) -> T {
        norm(cross(sub(b, a), sub(c, a))) * T::lit(0.5)
    }

    /// Signed volume of tetrahedron `oabc`.
    pub fn tet_volume<T: Real>(o: [T; 3], a: [T; 3], b: [T; 3], c: [T; 3]) -> T {
        dot(sub(a, o), cross(sub(b, o), sub(c, o))) / T::lit(6.0)
    }
}
