//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry is written against [`Real`], which is implemented for `f32`
//! and `f64`. The two linear-algebra kernels that need a dense eigen-solver
//! or a complex determinant are routed through `nalgebra` per concrete type.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::Serialize;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + Default
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon scaled tolerances are expressed through this.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Eigenvalues of the companion matrix of the monic polynomial
    /// `z^n + monic_tail[n-1] z^(n-1) + ... + monic_tail[0]`.
    fn companion_eigenvalues(monic_tail: &[Complex<Self>]) -> Option<Vec<Complex<Self>>>;

    /// Determinant of a dense row-major `n x n` complex matrix.
    fn complex_determinant(n: usize, row_major: &[Complex<Self>]) -> Complex<Self>;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn companion_eigenvalues(monic_tail: &[Complex<$t>]) -> Option<Vec<Complex<$t>>> {
                let n = monic_tail.len();
                if n == 0 {
                    return Some(Vec::new());
                }
                let mut m = DMatrix::<Complex<$t>>::zeros(n, n);
                for i in 1..n {
                    m[(i, i - 1)] = Complex::new(1.0, 0.0);
                }
                for (i, c) in monic_tail.iter().enumerate() {
                    m[(i, n - 1)] = -*c;
                }
                let schur = Schur::try_new(m, <$t>::EPSILON, 10_000)?;
                schur.eigenvalues().map(|v| v.iter().copied().collect())
            }

            fn complex_determinant(n: usize, row_major: &[Complex<$t>]) -> Complex<$t> {
                DMatrix::from_row_slice(n, n, row_major).determinant()
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Complex modulus without the `Float` ambiguity of method syntax on generics.
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_roots_of_quadratic() {
        // z^2 - 3z + 2 = (z-1)(z-2)
        let tail = [Complex::new(2.0, 0.0), Complex::new(-3.0, 0.0)];
        let mut roots = f64::companion_eigenvalues(&tail).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!((roots[1] - Complex::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn companion_roots_f32() {
        // z^2 + 1
        let tail = [Complex::new(1.0f32, 0.0), Complex::new(0.0, 0.0)];
        let roots = f32::companion_eigenvalues(&tail).unwrap();
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-5);
            assert!(r.re.abs() < 1e-5);
        }
    }

    #[test]
    fn determinant_matches_hand_value() {
        let one = Complex::new(1.0, 0.0);
        let i = Complex::new(0.0, 1.0);
        // [[1, i], [i, 1]] -> 1 - i^2 = 2
        let d = f64::complex_determinant(2, &[one, i, i, one]);
        assert!((d - Complex::new(2.0, 0.0)).norm() < 1e-14);
    }
}
