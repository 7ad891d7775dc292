//! Asymptotic ends of the real amoeba and their gluing across the toric boundary.
//!
//! Near the boundary divisor of a side of the Newton polygon only the monomials on
//! that side matter, so the edge polynomial `sum a_k t^k` in `t = z^e` (with `e` the
//! primitive side direction) predicts every real boundary point: a real root `t_r`
//! is a tentacle whose ends satisfy `sign(z^e) = sign(t_r)` and
//! `<(u, v), e> -> log|t_r|`. Arc ends are matched to these roots; two ends matched
//! to the same root are one branch crossing the divisor.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::NewtonPolygon;
use crate::laurent::LaurentPoly;
use crate::roots;
use crate::scalar::{cabs, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcEnd<T> {
    pub arc: usize,
    pub at_start: bool,
    pub quadrant: (i8, i8),
    /// Last log point of the end.
    pub point: (T, T),
    /// Unit direction pointing out of the arc, averaged over the last steps.
    pub direction: (T, T),
    /// Change of direction over the averaging window, radians.
    pub drift: T,
}

/// A real nonzero root of an edge polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeRoot<T> {
    pub side: usize,
    pub sign: i8,
    pub log_modulus: T,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRoots<T> {
    pub real: Vec<EdgeRoot<T>>,
    /// Distinct simple real roots per side.
    pub simple_real_per_side: Vec<usize>,
    /// Two roots of equal sign on one side are too close to tell apart.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TentacleTolerances {
    /// Maximal angle between an end direction and a side normal.
    pub side_angle: f64,
    /// Maximal intercept mismatch between an end and an edge root.
    pub glue: f64,
    /// Equal-sign edge roots closer than this make gluing ambiguous.
    pub ambiguity: f64,
    /// Direction drift below this counts as stabilized.
    pub drift: f64,
}

impl Default for TentacleTolerances {
    fn default() -> Self {
        TentacleTolerances {
            side_angle: 0.05,
            glue: 0.05,
            ambiguity: 1e-3,
            drift: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TentacleData<T> {
    /// Index into the arc-end list.
    pub end: usize,
    pub side: usize,
    pub normal: (i64, i64),
    /// `<(u, v), e>` at the end, the log-modulus of the boundary coordinate.
    pub intercept: T,
    pub sign: i8,
    /// Matched edge root, when one lies within the glue tolerance.
    pub root: Option<usize>,
    pub stabilized: bool,
}

/// Ends glued at one real boundary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tentacle {
    pub side: usize,
    pub root: usize,
    pub ends: Vec<usize>,
}

pub fn edge_roots<T: Real>(p: &LaurentPoly<T>, poly: &NewtonPolygon, ambiguity: T) -> Result<EdgeRoots<T>> {
    let mut real = Vec::new();
    let mut simple_real_per_side = Vec::new();
    for (side, e) in poly.edges().iter().enumerate() {
        let coeffs: Vec<Complex<T>> = (0..=e.d as i64)
            .map(|k| {
                let i = e.from.0 + k * e.direction.0;
                let j = e.from.1 + k * e.direction.1;
                Complex::new(p.coefficient(i as i32, j as i32), T::zero())
            })
            .collect();
        let rs = roots::roots(&coeffs, T::lit(1e-14))?;
        let mut simple = 0;
        for (z, mult) in roots::cluster(&rs, T::lit(1e-7)) {
            if z.im.abs() > T::lit(1e-9) * cabs(z) || z.re == T::zero() {
                continue;
            }
            if mult == 1 {
                simple += 1;
            }
            real.push(EdgeRoot {
                side,
                sign: if z.re > T::zero() { 1 } else { -1 },
                log_modulus: z.re.abs().ln(),
                multiplicity: mult,
            });
        }
        simple_real_per_side.push(simple);
    }
    let ambiguous = real.iter().enumerate().any(|(a, ra)| {
        real[a + 1..]
            .iter()
            .any(|rb| ra.side == rb.side && ra.sign == rb.sign && (ra.log_modulus - rb.log_modulus).abs() < ambiguity)
    });
    Ok(EdgeRoots {
        real,
        simple_real_per_side,
        ambiguous,
    })
}

fn angle_between<T: Real>(a: (T, T), b: (T, T)) -> T {
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    cross.atan2(dot).abs()
}

/// Assigns every end to a side and, when possible, to an edge root.
pub fn assign_ends<T: Real>(
    ends: &[ArcEnd<T>],
    poly: &NewtonPolygon,
    edge: &EdgeRoots<T>,
    tol: &TentacleTolerances,
) -> Result<Vec<TentacleData<T>>> {
    let side_tol = T::lit(tol.side_angle);
    let glue_tol = T::lit(tol.glue);
    ends.iter()
        .enumerate()
        .map(|(k, end)| {
            let (side, e, angle) = poly
                .edges()
                .iter()
                .enumerate()
                .map(|(s, e)| {
                    let n = (T::from_i64(e.normal.0).unwrap(), T::from_i64(e.normal.1).unwrap());
                    (s, e, angle_between(end.direction, n))
                })
                .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
                .expect("polygon has edges");
            if !(angle < side_tol) {
                return Err(Error::UnassignableEnd {
                    u: end.point.0.to_f64_lossy(),
                    v: end.point.1.to_f64_lossy(),
                });
            }
            let (e1, e2) = e.direction;
            let intercept = end.point.0 * T::from_i64(e1).unwrap() + end.point.1 * T::from_i64(e2).unwrap();
            let sign = quadrant_sign(end.quadrant, e.direction);
            let root = edge
                .real
                .iter()
                .enumerate()
                .filter(|(_, r)| r.side == side && r.sign == sign)
                .map(|(idx, r)| (idx, (r.log_modulus - intercept).abs()))
                .filter(|&(_, gap)| gap < glue_tol)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(idx, _)| idx);
            Ok(TentacleData {
                end: k,
                side,
                normal: e.normal,
                intercept,
                sign,
                root,
                stabilized: end.drift < T::lit(tol.drift),
            })
        })
        .collect()
}

/// Sign of `x^e1 y^e2` in the given quadrant.
pub fn quadrant_sign(quadrant: (i8, i8), e: (i64, i64)) -> i8 {
    let mut s = 1;
    if quadrant.0 < 0 && e.0.rem_euclid(2) == 1 {
        s = -s;
    }
    if quadrant.1 < 0 && e.1.rem_euclid(2) == 1 {
        s = -s;
    }
    s
}

/// Groups ends by matched edge root. Ends without a root form singleton groups
/// keyed by their side; they are returned separately.
pub fn glue<T: Real>(data: &[TentacleData<T>], edge: &EdgeRoots<T>) -> (Vec<Tentacle>, Vec<usize>) {
    let mut groups: Vec<Tentacle> = Vec::new();
    let mut loose = Vec::new();
    for d in data {
        match d.root {
            Some(root) => match groups.iter_mut().find(|g| g.root == root) {
                Some(g) => g.ends.push(d.end),
                None => groups.push(Tentacle {
                    side: edge.real[root].side,
                    root,
                    ends: vec![d.end],
                }),
            },
            None => loose.push(d.end),
        }
    }
    groups.sort_by_key(|g| (g.side, g.root));
    (groups, loose)
}
