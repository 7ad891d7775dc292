//! Univariate complex root finding through companion-matrix eigenvalues.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};

/// Horner evaluation, coefficients in ascending powers.
pub fn horner<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    coeffs.iter().rev().fold(Complex::zero(), |acc, &c| acc * z + c)
}

fn horner_with_derivative<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::zero();
    let mut dp = Complex::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Drops leading coefficients whose modulus is below `rel_tol` times the
/// largest coefficient modulus. Returns an empty vector for the zero polynomial.
pub fn trim_leading<T: Real>(coeffs: &[Complex<T>], rel_tol: T) -> Vec<Complex<T>> {
    let scale = coeffs.iter().map(|&c| cabs(c)).fold(T::zero(), T::max);
    if scale == T::zero() {
        return Vec::new();
    }
    let mut end = coeffs.len();
    while end > 0 && cabs(coeffs[end - 1]) <= rel_tol * scale {
        end -= 1;
    }
    coeffs[..end].to_vec()
}

/// All complex roots of the polynomial with ascending coefficients `coeffs`,
/// after trimming numerically vanishing leading coefficients.
///
/// The variable is rescaled so that the extreme coefficients balance before the
/// companion matrix is formed, and each eigenvalue receives a few guarded Newton
/// polishing steps on the original polynomial.
pub fn roots<T: Real>(coeffs: &[Complex<T>], rel_tol: T) -> Result<Vec<Complex<T>>> {
    let trimmed = trim_leading(coeffs, rel_tol);
    if trimmed.len() <= 1 {
        return Ok(Vec::new());
    }
    // exact zero roots are split off so the scaling below stays finite
    let zeros = trimmed.iter().take_while(|c| c.is_zero()).count();
    let core = &trimmed[zeros..];
    let n = core.len() - 1;
    let mut out = vec![Complex::zero(); zeros];
    if n == 0 {
        return Ok(out);
    }
    let lead = cabs(core[n]);
    let low = cabs(core[0]);
    let s = (low / lead).powf(T::one() / T::from_usize(n).unwrap());
    let s = if s.is_finite() && s > T::zero() { s } else { T::one() };
    let mut sk = T::one();
    let scaled: Vec<Complex<T>> = core
        .iter()
        .map(|&c| {
            let v = c * sk;
            sk = sk * s;
            v
        })
        .collect();
    let lead_c = scaled[n];
    let tail: Vec<Complex<T>> = scaled[..n].iter().map(|&c| c / lead_c).collect();
    let eig = T::companion_eigenvalues(&tail).ok_or(Error::RootFinding(n))?;
    for w in eig {
        let mut z = w * s;
        polish(core, &mut z);
        out.push(z);
    }
    Ok(out)
}

fn polish<T: Real>(coeffs: &[Complex<T>], z: &mut Complex<T>) {
    let (mut p, _) = horner_with_derivative(coeffs, *z);
    for _ in 0..3 {
        let (_, dp) = horner_with_derivative(coeffs, *z);
        if dp.is_zero() {
            return;
        }
        let cand = *z - p / dp;
        let pc = horner(coeffs, cand);
        if cabs(pc) < cabs(p) {
            *z = cand;
            p = pc;
        } else {
            return;
        }
    }
}

/// Groups points whose pairwise distance is below `tol` (single linkage over
/// the given order) and returns each cluster's mean with its size.
pub fn cluster<T: Real>(points: &[Complex<T>], tol: T) -> Vec<(Complex<T>, usize)> {
    let mut groups: Vec<Vec<Complex<T>>> = Vec::new();
    'outer: for &z in points {
        for g in groups.iter_mut() {
            if g.iter().any(|&w| cabs(w - z) < tol) {
                g.push(z);
                continue 'outer;
            }
        }
        groups.push(vec![z]);
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            let sum = g.iter().fold(Complex::zero(), |a, &b| a + b);
            (sum / T::from_usize(n).unwrap(), n)
        })
        .collect()
}
