//! The logarithmic Gauss map `[z1 f_z1 : z2 f_z2]` and its fibers over real
//! directions.
//!
//! A fiber over `theta` is the common zero set in `(C*)^2` of `f` and
//! `sin(theta) z1 f_z1 - cos(theta) z2 f_z2`. It is computed by eliminating one
//! variable with a Sylvester resultant, whose coefficients are recovered by
//! sampling the determinant on the unit circle and inverting the DFT. Each root is
//! back-substituted and polished by Newton's method on the full system.

use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::NewtonPolygon;
use crate::laurent::{LaurentPoly, Var};
use crate::roots;
use crate::scalar::{cabs, Real};

/// A point of `RP^1`, stored as an angle reduced to `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct RP1Angle<T>(T);

impl<T: Real> RP1Angle<T> {
    pub fn new(theta: T) -> Self {
        let pi = T::PI();
        let mut t = theta % pi;
        if t < T::zero() {
            t = t + pi;
        }
        if t >= pi {
            t = t - pi;
        }
        RP1Angle(t)
    }

    /// Projective angle of `[a : b]`.
    pub fn from_vector(a: T, b: T) -> Result<Self> {
        if a == T::zero() && b == T::zero() {
            return Err(Error::UndefinedDirection);
        }
        Ok(Self::new(b.atan2(a)))
    }

    pub fn theta(self) -> T {
        self.0
    }

    /// Signed difference `self - other` reduced to `(-pi/2, pi/2]`.
    pub fn diff(self, other: Self) -> T {
        reduce_half_turn(self.0 - other.0)
    }
}

pub(crate) fn reduce_half_turn<T: Real>(d: T) -> T {
    let pi = T::PI();
    let half = pi / T::lit(2.0);
    let mut d = d % pi;
    if d > half {
        d = d - pi;
    } else if d <= -half {
        d = d + pi;
    }
    d
}

/// `gamma(x, y)` for a real point of the curve.
pub fn gauss_direction<T: Real>(p: &LaurentPoly<T>, x: T, y: T) -> Result<RP1Angle<T>> {
    if x == T::zero() || y == T::zero() {
        return Err(Error::Domain("gauss direction on a coordinate axis".into()));
    }
    let (a, b) = p.log_gauss_pair();
    RP1Angle::from_vector(a.eval_real(x, y), b.eval_real(x, y))
}

/// `(f, sin(theta) z1 f_z1 - cos(theta) z2 f_z2)`.
pub fn fiber_system<T: Real>(p: &LaurentPoly<T>, theta: RP1Angle<T>) -> (LaurentPoly<T>, LaurentPoly<T>) {
    let (a, b) = p.log_gauss_pair();
    let (s, c) = theta.theta().sin_cos();
    (p.clone(), a.scale(s).add(&b.scale(-c)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberTolerances {
    /// Relative residual accepted for a solution of the fiber system.
    pub residual: f64,
    /// Imaginary parts below `real * |z|` count as real.
    pub real: f64,
    /// Solutions closer than this (relative) are one solution.
    pub cluster: f64,
    /// Coordinates with modulus below this are on the toric boundary.
    pub boundary: f64,
    /// Two distinct solutions closer than this raise the ill-conditioned flag.
    pub ill_conditioned: f64,
    /// Relative size of `(x f_x, y f_y)` below which a solution is a singular
    /// point of the curve rather than a fiber point.
    pub singular: f64,
}

impl Default for FiberTolerances {
    fn default() -> Self {
        FiberTolerances {
            residual: 1e-7,
            real: 1e-7,
            cluster: 1e-6,
            boundary: 1e-9,
            ill_conditioned: 1e-5,
            singular: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberSolution<T> {
    pub x: (T, T),
    pub y: (T, T),
    pub real: bool,
    /// The logarithmic Gauss vector vanishes here: a singular point of the
    /// curve, which lies in every fiber.
    pub singular: bool,
    pub residual: T,
}

impl<T: Real> FiberSolution<T> {
    pub fn x(&self) -> Complex<T> {
        Complex::new(self.x.0, self.x.1)
    }

    pub fn y(&self) -> Complex<T> {
        Complex::new(self.y.0, self.y.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberReport<T> {
    pub theta: RP1Angle<T>,
    /// Solutions that are not singular points.
    pub total_count: usize,
    pub real_count: usize,
    pub singular_count: usize,
    pub expected: usize,
    pub residual: T,
    /// Fewer solutions than the degree: some escaped to the toric boundary.
    pub boundary_escape: bool,
    pub ill_conditioned: bool,
    pub solutions: Vec<FiberSolution<T>>,
}

/// Dense coefficients of a cleared polynomial: `rows[k][a]` multiplies `x^a y^k`.
struct Dense<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> Dense<T> {
    fn new(p: &LaurentPoly<T>, imin: i32, jmin: i32, deg_x: usize) -> Self {
        let deg_y = p.terms().iter().map(|t| (t.j - jmin) as usize).max().unwrap_or(0);
        let mut rows = vec![vec![T::zero(); deg_x + 1]; deg_y + 1];
        for t in p.terms() {
            rows[(t.j - jmin) as usize][(t.i - imin) as usize] = t.c;
        }
        Dense { rows }
    }

    fn degree_y(&self) -> usize {
        self.rows.len() - 1
    }

    fn degree_x(&self) -> usize {
        self.rows
            .iter()
            .filter_map(|r| r.iter().rposition(|c| *c != T::zero()))
            .max()
            .unwrap_or(0)
    }

    fn at(&self, x: Complex<T>) -> Vec<Complex<T>> {
        self.rows
            .iter()
            .map(|r| r.iter().rev().fold(Complex::zero(), |acc, &c| acc * x + c))
            .collect()
    }
}

fn sylvester<T: Real>(f: &[Complex<T>], h: &[Complex<T>]) -> (usize, Vec<Complex<T>>) {
    let m = f.len() - 1;
    let n = h.len() - 1;
    let size = m + n;
    let mut s = vec![Complex::zero(); size * size];
    for r in 0..n {
        for (k, &c) in f.iter().rev().enumerate() {
            s[r * size + r + k] = c;
        }
    }
    for r in 0..m {
        for (k, &c) in h.iter().rev().enumerate() {
            s[(n + r) * size + r + k] = c;
        }
    }
    (size, s)
}

/// Resultant with respect to `y` as a polynomial in `x` (ascending coefficients).
fn resultant_in_x<T: Real>(f: &Dense<T>, h: &Dense<T>) -> Option<Vec<Complex<T>>> {
    let (m, n) = (f.degree_y(), h.degree_y());
    let bound = n * f.degree_x() + m * h.degree_x();
    let samples = bound + 1;
    let nf = T::from_usize(samples).unwrap();
    let two_pi = T::lit(2.0 * PI);
    let mut values = Vec::with_capacity(samples);
    let mut scale = T::zero();
    for k in 0..samples {
        let ang = two_pi * T::from_usize(k).unwrap() / nf;
        let x = Complex::new(ang.cos(), ang.sin());
        let (size, mat) = sylvester(&f.at(x), &h.at(x));
        // Hadamard bound of this sample, for the identically-zero test
        let hadamard = (0..size).fold(T::one(), |acc, r| {
            let norm = mat[r * size..(r + 1) * size]
                .iter()
                .fold(T::zero(), |a, z| a + z.norm_sqr())
                .sqrt();
            acc * norm
        });
        scale = scale.max(hadamard);
        values.push(if size == 0 {
            Complex::new(T::one(), T::zero())
        } else {
            T::complex_determinant(size, &mat)
        });
    }
    let peak = values.iter().map(|&v| cabs(v)).fold(T::zero(), T::max);
    if !(peak > T::lit(1e-12) * scale) {
        return None;
    }
    let coeffs = (0..samples)
        .map(|j| {
            let acc = values.iter().enumerate().fold(Complex::zero(), |acc, (k, &v)| {
                let ang = -two_pi * T::from_usize((j * k) % samples).unwrap() / nf;
                acc + v * Complex::new(ang.cos(), ang.sin())
            });
            acc / nf
        })
        .collect();
    Some(coeffs)
}

struct System<T> {
    f: LaurentPoly<T>,
    h: LaurentPoly<T>,
    fx: LaurentPoly<T>,
    fy: LaurentPoly<T>,
    hx: LaurentPoly<T>,
    hy: LaurentPoly<T>,
}

impl<T: Real> System<T> {
    fn new(f: LaurentPoly<T>, h: LaurentPoly<T>) -> Self {
        System {
            fx: f.partial(Var::X),
            fy: f.partial(Var::Y),
            hx: h.partial(Var::X),
            hy: h.partial(Var::Y),
            f,
            h,
        }
    }

    fn residual(&self, x: Complex<T>, y: Complex<T>) -> T {
        self.f.relative_residual(x, y).max(self.h.relative_residual(x, y))
    }

    fn newton(&self, mut x: Complex<T>, mut y: Complex<T>) -> Option<(Complex<T>, Complex<T>)> {
        for _ in 0..40 {
            if x.is_zero() || y.is_zero() || !x.re.is_finite() || !y.re.is_finite() {
                return None;
            }
            let f = self.f.eval_unchecked(x, y);
            let h = self.h.eval_unchecked(x, y);
            let a = self.fx.eval_unchecked(x, y);
            let b = self.fy.eval_unchecked(x, y);
            let c = self.hx.eval_unchecked(x, y);
            let d = self.hy.eval_unchecked(x, y);
            let det = a * d - b * c;
            if det.is_zero() {
                break;
            }
            let dx = (d * f - b * h) / det;
            let dy = (a * h - c * f) / det;
            x = x - dx;
            y = y - dy;
            let eps = T::epsilon() * T::lit(4.0);
            if cabs(dx) <= eps * cabs(x) && cabs(dy) <= eps * cabs(y) {
                break;
            }
        }
        (x.re.is_finite() && x.im.is_finite() && y.re.is_finite() && y.im.is_finite()).then_some((x, y))
    }
}

fn is_real<T: Real>(z: Complex<T>, tol: T) -> bool {
    z.im.abs() <= tol * cabs(z)
}

fn close<T: Real>(a: (Complex<T>, Complex<T>), b: (Complex<T>, Complex<T>), tol: T) -> bool {
    let rel = |u: Complex<T>, v: Complex<T>| cabs(u - v) / T::one().max(cabs(u));
    rel(a.0, b.0) < tol && rel(a.1, b.1) < tol
}

/// Closeness relative to the moduli, for points compared across charts.
fn close_rel<T: Real>(a: (Complex<T>, Complex<T>), b: (Complex<T>, Complex<T>), tol: T) -> bool {
    let rel = |u: Complex<T>, v: Complex<T>| cabs(u - v) / cabs(u).max(cabs(v));
    rel(a.0, b.0) < tol && rel(a.1, b.1) < tol
}

/// Solutions in `(C*)^2` of `f = h = 0` found by one elimination, deduplicated,
/// in the original variable order.
fn solve_pairs<T: Real>(
    f: &LaurentPoly<T>,
    h: &LaurentPoly<T>,
    theta: T,
    tol: &FiberTolerances,
) -> Result<Vec<(Complex<T>, Complex<T>)>> {
    if h.is_zero() {
        return Err(Error::DegenerateResultant {
            theta: theta.to_f64_lossy(),
        });
    }
    let terms = f.terms().iter().chain(h.terms().iter());
    let imin = terms.clone().map(|t| t.i).min().unwrap_or(0);
    let jmin = terms.clone().map(|t| t.j).min().unwrap_or(0);
    let imax = terms.clone().map(|t| t.i).max().unwrap_or(0);
    let jmax = terms.map(|t| t.j).max().unwrap_or(0);
    // eliminate the variable of smaller degree; the eliminant lives in the other one
    let swapped = jmax - jmin > imax - imin;
    let (fs, hs) = if swapped {
        (f.swap(), h.swap())
    } else {
        (f.clone(), h.clone())
    };
    let (imin, jmin, deg_x) = if swapped {
        (jmin, imin, (jmax - jmin) as usize)
    } else {
        (imin, jmin, (imax - imin) as usize)
    };
    let df = Dense::new(&fs, imin, jmin, deg_x);
    let dh = Dense::new(&hs, imin, jmin, deg_x);
    let res = resultant_in_x(&df, &dh).ok_or(Error::DegenerateResultant {
        theta: theta.to_f64_lossy(),
    })?;
    let xs = roots::roots(&res, T::lit(1e-11))?;
    let system = System::new(fs.clone(), hs);
    let boundary = T::lit(tol.boundary);
    let cluster_tol = T::lit(tol.cluster);
    let mut found: Vec<(Complex<T>, Complex<T>)> = Vec::new();
    for (x0, _) in roots::cluster(&xs, cluster_tol) {
        if cabs(x0) < boundary || cabs(x0) > T::one() / boundary {
            continue;
        }
        let slice = fs.slice(Var::X, x0)?;
        for y0 in slice.roots()? {
            let Some((x, y)) = system.newton(x0, y0) else {
                continue;
            };
            if cabs(x) < boundary || cabs(y) < boundary {
                continue;
            }
            if system.residual(x, y) >= T::lit(tol.residual) {
                continue;
            }
            if !found.iter().any(|&s| close(s, (x, y), cluster_tol)) {
                found.push((x, y));
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|(x, y)| if swapped { (y, x) } else { (x, y) })
        .collect())
}

/// Torus rescaling `(e^a, e^b)` that best equalizes the coefficient moduli of `f`
/// in the least-squares sense.
fn balancing_shift<T: Real>(f: &LaurentPoly<T>) -> (T, T) {
    let n = T::from_usize(f.terms().len()).unwrap();
    let (mut si, mut sj, mut sl) = (T::zero(), T::zero(), T::zero());
    for t in f.terms() {
        si = si + T::from_i32(t.i).unwrap();
        sj = sj + T::from_i32(t.j).unwrap();
        sl = sl + t.c.abs().ln();
    }
    let (mi, mj, ml) = (si / n, sj / n, sl / n);
    let (mut sii, mut sij, mut sjj, mut sil, mut sjl) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for t in f.terms() {
        let di = T::from_i32(t.i).unwrap() - mi;
        let dj = T::from_i32(t.j).unwrap() - mj;
        let dl = t.c.abs().ln() - ml;
        sii = sii + di * di;
        sij = sij + di * dj;
        sjj = sjj + dj * dj;
        sil = sil + di * dl;
        sjl = sjl + dj * dl;
    }
    let det = sii * sjj - sij * sij;
    if !(det.abs() > T::epsilon()) {
        return (T::zero(), T::zero());
    }
    // log|c| ~ ml + a' (i - mi) + b' (j - mj); scaling by (e^-a', e^-b') flattens it
    let a = (sil * sjj - sjl * sij) / det;
    let b = (sjl * sii - sil * sij) / det;
    (-a, -b)
}

/// Solutions of the system in the torus-rescaled chart `(e^a x, e^b y)`,
/// mapped back to the original coordinates.
fn solve_shifted<T: Real>(
    f: &LaurentPoly<T>,
    h: &LaurentPoly<T>,
    shift: (T, T),
    theta: T,
    tol: &FiberTolerances,
) -> Result<Vec<(Complex<T>, Complex<T>)>> {
    let (a, b) = shift;
    let pairs = solve_pairs(&f.torus_scale(a, b), &h.torus_scale(a, b), theta, tol)?;
    let (ea, eb) = (a.exp(), b.exp());
    // a shifted chart can lift a boundary solution into range; test again here
    let lo = T::lit(tol.boundary);
    let inside = |z: Complex<T>| cabs(z) >= lo && cabs(z) <= T::one() / lo;
    Ok(pairs
        .into_iter()
        .map(|(x, y)| (x * ea, y * eb))
        .filter(|&(x, y)| inside(x) && inside(y))
        .collect())
}

/// All solutions in `(C*)^2` of `f = h = 0`, deduplicated. The system is first
/// solved in a balanced chart; when fewer than `expected` solutions appear, the
/// missing ones usually sit far out along an edge normal, so charts shifted in
/// those directions are tried as well.
///
/// Returns `(solutions, ill_conditioned)`.
fn solve_system<T: Real>(
    f: &LaurentPoly<T>,
    h: &LaurentPoly<T>,
    theta: T,
    tol: &FiberTolerances,
    expected: usize,
    normals: &[(i64, i64)],
) -> Result<(Vec<FiberSolution<T>>, bool)> {
    let base = balancing_shift(f);
    let mut found = solve_shifted(f, h, base, theta, tol)?;
    let cluster_tol = T::lit(tol.cluster);
    'outer: for step in [4.0, 8.0, 14.0] {
        for &(n1, n2) in normals {
            if found.len() >= expected {
                break 'outer;
            }
            let s = T::lit(step);
            let shift = (
                base.0 + s * T::from_i64(n1).unwrap(),
                base.1 + s * T::from_i64(n2).unwrap(),
            );
            let Ok(extra) = solve_shifted(f, h, shift, theta, tol) else {
                continue;
            };
            for pt in extra {
                if !found.iter().any(|&s| close_rel(s, pt, cluster_tol)) {
                    found.push(pt);
                }
            }
        }
    }
    let ill_tol = T::lit(tol.ill_conditioned);
    let ill = found
        .iter()
        .enumerate()
        .any(|(a, &sa)| found[a + 1..].iter().any(|&sb| close_rel(sa, sb, ill_tol)));
    let system = System::new(f.clone(), h.clone());
    let real_tol = T::lit(tol.real);
    let (ga, gb) = f.log_gauss_pair();
    let singular_tol = T::lit(tol.singular);
    let mut out: Vec<FiberSolution<T>> = found
        .into_iter()
        .map(|(x, y)| {
            let scale = ga.magnitude(x, y) + gb.magnitude(x, y);
            let size = cabs(ga.eval_unchecked(x, y)) + cabs(gb.eval_unchecked(x, y));
            FiberSolution {
                x: (x.re, x.im),
                y: (y.re, y.im),
                real: is_real(x, real_tol) && is_real(y, real_tol),
                singular: size <= singular_tol * scale,
                residual: system.residual(x, y),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.x.0, a.x.1, a.y.0, a.y.1)
            .partial_cmp(&(b.x.0, b.x.1, b.y.0, b.y.1))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok((out, ill))
}

pub fn count_fiber<T: Real>(
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    theta: RP1Angle<T>,
    tol: &FiberTolerances,
) -> Result<FiberReport<T>> {
    let (f, h) = fiber_system(p, theta);
    let expected = poly.gauss_degree() as usize;
    let normals: Vec<(i64, i64)> = poly.edges().iter().map(|e| e.normal).collect();
    let (solutions, ill_conditioned) = solve_system(&f, &h, theta.theta(), tol, expected, &normals)?;
    let singular_count = solutions.iter().filter(|s| s.singular).count();
    let total_count = solutions.len() - singular_count;
    let real_count = solutions.iter().filter(|s| s.real && !s.singular).count();
    let residual = solutions.iter().map(|s| s.residual).fold(T::zero(), T::max);
    Ok(FiberReport {
        theta,
        total_count,
        real_count,
        singular_count,
        expected,
        residual,
        boundary_escape: total_count < expected,
        ill_conditioned,
        solutions,
    })
}

/// Real points of the fiber over `theta`, snapped to the real axis.
pub fn real_fiber_points<T: Real>(
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    theta: RP1Angle<T>,
    tol: &FiberTolerances,
) -> Result<Vec<(T, T)>> {
    Ok(count_fiber(p, poly, theta, tol)?
        .solutions
        .iter()
        .filter(|s| s.real && !s.singular)
        .map(|s| (s.x.0, s.y.0))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample<T> {
    pub theta: T,
    pub total: usize,
    pub real: usize,
    /// Singular points of the curve met by this fiber (excluded from the counts).
    pub singular: usize,
    /// The sample was moved off `k pi / n` to avoid a degenerate direction.
    pub perturbed: bool,
    /// Still short of the degree or ill-conditioned after perturbation.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport<T> {
    pub samples: Vec<ScanSample<T>>,
    pub expected: usize,
    pub min_real: usize,
    pub max_real: usize,
    /// Fraction of samples whose fiber is entirely real and of full size.
    pub full_real_fraction: T,
    pub totally_real: bool,
    pub flagged_thetas: Vec<T>,
    /// Samples whose fiber could not be solved at all.
    pub failed: usize,
    /// Every sample satisfied `total - real` even.
    pub parity_ok: bool,
    /// Most singular points met by one fiber; non-zero means the curve is singular.
    pub singular_points: usize,
}

impl<T: Real> ScanReport<T> {
    /// Samples whose fiber is not entirely real and of full size.
    pub fn deficient(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| !(s.real == self.expected && s.total == self.expected))
            .count()
            + self.failed
    }
}

const PERTURB_ATTEMPTS: u64 = 4;

fn scan_sample<T: Real>(
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    k: usize,
    n: usize,
    seed: u64,
    tol: &FiberTolerances,
) -> Option<ScanSample<T>> {
    let base = T::PI() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let mut last: Option<ScanSample<T>> = None;
    for attempt in 0..=PERTURB_ATTEMPTS {
        let theta = if attempt == 0 {
            base
        } else {
            let mag: f64 = rng.random_range(1.0..2.0) * 1e-4 * attempt as f64;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            base + T::lit(sign * mag)
        };
        let angle = RP1Angle::new(theta);
        match count_fiber(p, poly, angle, tol) {
            Ok(r) => {
                let good = !r.boundary_escape && !r.ill_conditioned && r.total_count == r.expected;
                let s = ScanSample {
                    theta: angle.theta(),
                    total: r.total_count,
                    real: r.real_count,
                    singular: r.singular_count,
                    perturbed: attempt > 0,
                    flagged: !good,
                };
                if good {
                    return Some(s);
                }
                last = Some(s);
            }
            Err(_) => continue,
        }
    }
    last
}

/// Samples the fiber structure at `theta_k = k pi / n`, perturbing samples that
/// land on degenerate or boundary-escaping directions.
pub fn totally_real_scan<T: Real>(
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    n_samples: usize,
    seed: u64,
    tol: &FiberTolerances,
) -> Result<ScanReport<T>> {
    if n_samples < 16 {
        return Err(Error::Parameter(format!(
            "totally-real scan needs at least 16 samples, got {n_samples}"
        )));
    }
    let results: Vec<Option<ScanSample<T>>> = (0..n_samples)
        .into_par_iter()
        .map(|k| scan_sample(p, poly, k, n_samples, seed, tol))
        .collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    if failed * 10 > n_samples {
        return Err(Error::ScanDegenerate {
            failed,
            total: n_samples,
        });
    }
    let samples: Vec<ScanSample<T>> = results.into_iter().flatten().collect();
    let expected = poly.gauss_degree() as usize;
    let full = samples
        .iter()
        .filter(|s| s.real == expected && s.total == expected)
        .count();
    Ok(ScanReport {
        expected,
        min_real: samples.iter().map(|s| s.real).min().unwrap_or(0),
        max_real: samples.iter().map(|s| s.real).max().unwrap_or(0),
        full_real_fraction: T::from_usize(full).unwrap() / T::from_usize(n_samples).unwrap(),
        totally_real: failed == 0 && full == samples.len(),
        flagged_thetas: samples.iter().filter(|s| s.flagged).map(|s| s.theta).collect(),
        failed,
        parity_ok: samples.iter().all(|s| (s.total - s.real) % 2 == 0),
        singular_points: samples.iter().map(|s| s.singular).max().unwrap_or(0),
        samples,
    })
}

/// Multiplicity-weighted length of the Gauss image: `(pi / n) sum real_count`.
pub fn crofton_from_scan<T: Real>(scan: &ScanReport<T>) -> T {
    let n = T::from_usize(scan.samples.len() + scan.failed).unwrap();
    let sum = scan
        .samples
        .iter()
        .fold(T::zero(), |acc, s| acc + T::from_usize(s.real).unwrap());
    T::PI() * sum / n
}
