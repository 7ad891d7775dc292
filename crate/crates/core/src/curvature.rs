//! Total absolute curvature of traced amoeba arcs, inflections and pinching points.
//!
//! The amoeba curve in a quadrant is `F(u, v) = 0` with normal `(x f_x, y f_y)`,
//! so its total absolute curvature is the total variation of the projective
//! angle of that vector along the arc. The same quantity is the
//! multiplicity-weighted length of the Gauss image, which the fiber scan
//! estimates independently.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::{self, reduce_half_turn, FiberTolerances, ScanReport};
use crate::lattice::{curvature_bound, NewtonPolygon};
use crate::laurent::LaurentPoly;
use crate::scalar::Real;
use crate::tracer::{Arc, ArcSet, Chart};

/// Angle changes smaller than this do not count as a turn of the Gauss map.
const INFLECTION_PROMINENCE: f64 = 1e-7;
/// Consecutive lifted angles further apart than this mean the step control failed.
const LIFT_LIMIT: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcCurvature<T> {
    pub arc: usize,
    pub total: T,
    /// Point indices where the lifted Gauss angle turns back.
    pub inflections: Vec<usize>,
    /// Inflections within three points of a pinch.
    pub pinch_associated: usize,
    /// Gap between the end Gauss angles and the asymptotic edge directions.
    pub truncation: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchPoint<T> {
    pub location: (T, T),
    pub arcs: (usize, usize),
    /// Point indices on each arc nearest to the crossing.
    pub indices: (usize, usize),
    /// Angle between the two branches, in `[0, pi/2]`.
    pub alpha: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchTolerances {
    /// Branches closer than this cross.
    pub crossing: f64,
    /// Branches closer than this, but not crossing, are a near miss.
    pub near_miss: f64,
    /// Events with a smaller angle are tangential contact or coincident images.
    pub min_alpha: f64,
    /// Minimal arc length between two parts of one arc for a self-crossing.
    pub self_separation: f64,
}

impl Default for PinchTolerances {
    fn default() -> Self {
        PinchTolerances {
            crossing: 1e-4,
            near_miss: 3e-4,
            min_alpha: 0.01,
            self_separation: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchScan<T> {
    pub pinches: Vec<PinchPoint<T>>,
    pub near_misses: usize,
    /// Coincident or tangential events that were discarded.
    pub tangential: usize,
    /// Tangential events whose direction is not that of a tentacle, i.e. two
    /// branches touching or sharing an image away from the asymptotic ends.
    pub coincident: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport<T> {
    pub per_arc: Vec<ArcCurvature<T>>,
    pub total: T,
    /// `2 pi vol`.
    pub bound: T,
    pub crofton_total: Option<T>,
    pub p: usize,
    pub t: usize,
    /// `2 pi p + pi t`.
    pub branch_bound: T,
    /// Sum of per-arc truncation gaps.
    pub truncation_uncertainty: T,
    pub inflections: usize,
    pub pinches: PinchScan<T>,
}

impl<T: Real> CurvatureReport<T> {
    /// `total / bound`, or zero for an empty bound.
    pub fn ratio(&self) -> T {
        if self.bound > T::zero() {
            self.total / self.bound
        } else {
            T::zero()
        }
    }

    pub fn crofton_gap(&self) -> Option<T> {
        self.crofton_total.map(|c| (c - self.total).abs())
    }
}

fn gauss_angles<T: Real>(arc: &Arc<T>, p: &LaurentPoly<T>) -> Vec<T> {
    let chart = Chart::new(p, arc.quadrant);
    arc.log_points
        .iter()
        .map(|&l| {
            let g = chart.eval(l).gauss;
            g.1.atan2(g.0)
        })
        .collect()
}

/// Indices where a sequence of increments turns back by more than the
/// prominence. `cyclic` treats the sequence as closed.
fn turning_points<T: Real>(steps: &[T], cyclic: bool) -> Vec<usize> {
    let n = steps.len();
    if n == 0 {
        return Vec::new();
    }
    // angle noise grows with the scalar's epsilon
    let eps = T::lit(INFLECTION_PROMINENCE).max(T::epsilon() * T::lit(1e3));
    let passes = if cyclic { 3 } else { 1 };
    let mut out = Vec::new();
    // dir: +1 rising, -1 falling, 0 undecided
    let mut dir = 0i8;
    let mut level = T::zero();
    let mut extreme = T::zero();
    let mut extreme_at = 0usize;
    for k in 0..passes * n {
        level = level + steps[k % n];
        match dir {
            0 => {
                if level > eps {
                    dir = 1;
                } else if level < -eps {
                    dir = -1;
                } else {
                    continue;
                }
                extreme = level;
                extreme_at = k;
            }
            1 => {
                if level > extreme {
                    extreme = level;
                    extreme_at = k;
                } else if extreme - level > eps {
                    if !cyclic || (n..2 * n).contains(&extreme_at) {
                        out.push((extreme_at + 1) % n);
                    }
                    dir = -1;
                    extreme = level;
                    extreme_at = k;
                }
            }
            _ => {
                if level < extreme {
                    extreme = level;
                    extreme_at = k;
                } else if level - extreme > eps {
                    if !cyclic || (n..2 * n).contains(&extreme_at) {
                        out.push((extreme_at + 1) % n);
                    }
                    dir = 1;
                    extreme = level;
                    extreme_at = k;
                }
            }
        }
    }
    if cyclic {
        out.sort_unstable();
        out.dedup();
    }
    out
}

/// Gap between the Gauss angle at an arc end and the nearest edge direction.
fn end_gap<T: Real>(angle: T, poly: &NewtonPolygon) -> T {
    poly.edges()
        .iter()
        .map(|e| {
            let a = T::from_i64(e.direction.1)
                .unwrap()
                .atan2(T::from_i64(e.direction.0).unwrap());
            reduce_half_turn(angle - a).abs()
        })
        .fold(T::infinity(), T::min)
}

/// Total variation of the lifted Gauss angle along the arc, with the point
/// indices where the lift turns back.
pub fn arc_total_curvature<T: Real>(arc: &Arc<T>, p: &LaurentPoly<T>) -> Result<(T, Vec<usize>)> {
    let angles = gauss_angles(arc, p);
    if angles.len() < 2 {
        return Ok((T::zero(), Vec::new()));
    }
    let limit = T::lit(LIFT_LIMIT);
    let mut steps = Vec::with_capacity(angles.len() - 1);
    for (k, w) in angles.windows(2).enumerate() {
        let d = reduce_half_turn(w[1] - w[0]);
        if d.abs() > limit {
            return Err(Error::LiftAmbiguity {
                arc: arc.id,
                index: k + 1,
            });
        }
        steps.push(d);
    }
    // summing sorted magnitudes makes the total independent of orientation
    let mut mags: Vec<T> = steps.iter().map(|d| d.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let total = mags.iter().fold(T::zero(), |acc, &d| acc + d);
    let mut inflections = turning_points(&steps, arc.closed);
    if arc.closed {
        // step k ends at point k + 1; the last point repeats the first
        for i in inflections.iter_mut() {
            if *i == angles.len() - 1 {
                *i = 0;
            }
        }
        inflections.sort_unstable();
        inflections.dedup();
    }
    Ok((total, inflections))
}

fn arc_report<T: Real>(
    arc: &Arc<T>,
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    pinches: &[PinchPoint<T>],
) -> Result<ArcCurvature<T>> {
    let (total, inflections) = arc_total_curvature(arc, p)?;
    let truncation = if arc.closed || arc.log_points.is_empty() {
        T::zero()
    } else {
        let angles = gauss_angles(arc, p);
        end_gap(angles[0], poly) + end_gap(*angles.last().unwrap(), poly)
    };
    let near_pinch = |i: usize| {
        pinches.iter().any(|pp| {
            (pp.arcs.0 == arc.id && pp.indices.0.abs_diff(i) <= 3)
                || (pp.arcs.1 == arc.id && pp.indices.1.abs_diff(i) <= 3)
        })
    };
    Ok(ArcCurvature {
        arc: arc.id,
        total,
        pinch_associated: inflections.iter().filter(|&&i| near_pinch(i)).count(),
        inflections,
        truncation,
    })
}

/// Sums per-arc curvature and fills the bounds. `crofton_total` comes from a
/// fiber scan of the same polynomial, when one was run.
pub fn total_curvature<T: Real>(
    set: &ArcSet<T>,
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    crofton_total: Option<T>,
) -> Result<CurvatureReport<T>> {
    let pinches = pinch_scan(set, Some(p), &PinchTolerances::default());
    let per_arc: Vec<ArcCurvature<T>> = set
        .arcs
        .par_iter()
        .map(|a| arc_report(a, p, poly, &pinches.pinches))
        .collect::<Result<_>>()?;
    let total = per_arc.iter().fold(T::zero(), |acc, a| acc + a.total);
    let truncation_uncertainty = per_arc.iter().fold(T::zero(), |acc, a| acc + a.truncation);
    let p_count = set.compact_components();
    let t_count = set.tentacle_count();
    Ok(CurvatureReport {
        inflections: per_arc.iter().map(|a| a.inflections.len()).sum(),
        per_arc,
        total,
        bound: curvature_bound(poly),
        crofton_total,
        p: p_count,
        t: t_count,
        branch_bound: T::PI() * T::from_usize(2 * p_count + t_count).unwrap(),
        truncation_uncertainty,
        pinches,
    })
}

/// Crofton-type estimate `(pi / n) sum real_count(theta_k)`.
pub fn crofton_total_curvature<T: Real>(
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    n_samples: usize,
    seed: u64,
) -> Result<T> {
    if n_samples < 64 {
        return Err(Error::Parameter(format!(
            "Crofton estimate needs at least 64 samples, got {n_samples}"
        )));
    }
    let scan: ScanReport<T> = gauss::totally_real_scan(p, poly, n_samples, seed, &FiberTolerances::default())?;
    Ok(gauss::crofton_from_scan(&scan))
}

struct Segment<T> {
    arc: usize,
    index: usize,
    a: (T, T),
    b: (T, T),
    /// Arc length at `a`.
    s: T,
}

fn point_seg<T: Real>(p: (T, T), a: (T, T), b: (T, T)) -> (T, (T, T)) {
    let d = (b.0 - a.0, b.1 - a.1);
    let l2 = d.0 * d.0 + d.1 * d.1;
    let t = if l2 > T::zero() {
        (((p.0 - a.0) * d.0 + (p.1 - a.1) * d.1) / l2)
            .max(T::zero())
            .min(T::one())
    } else {
        T::zero()
    };
    let q = (a.0 + t * d.0, a.1 + t * d.1);
    ((p.0 - q.0).hypot(p.1 - q.1), q)
}

fn cross<T: Real>(o: (T, T), a: (T, T), b: (T, T)) -> T {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Distance between two segments and a representative closest point.
fn seg_seg<T: Real>(s: &Segment<T>, t: &Segment<T>) -> (T, (T, T)) {
    let d1 = cross(s.a, s.b, t.a);
    let d2 = cross(s.a, s.b, t.b);
    let d3 = cross(t.a, t.b, s.a);
    let d4 = cross(t.a, t.b, s.b);
    if d1 * d2 < T::zero() && d3 * d4 < T::zero() {
        let k = d3 / (d3 - d4);
        return (T::zero(), (s.a.0 + k * (s.b.0 - s.a.0), s.a.1 + k * (s.b.1 - s.a.1)));
    }
    let cands = [
        (point_seg(s.a, t.a, t.b), s.a),
        (point_seg(s.b, t.a, t.b), s.b),
        (point_seg(t.a, s.a, s.b), t.a),
        (point_seg(t.b, s.a, s.b), t.b),
    ];
    let ((d, q), p) = cands
        .into_iter()
        .min_by(|x, y| x.0 .0.partial_cmp(&y.0 .0).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    (d, ((p.0 + q.0) / T::lit(2.0), (p.1 + q.1) / T::lit(2.0)))
}

fn line_angle<T: Real>(a: (T, T), b: (T, T)) -> T {
    let cr = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    let ang = cr.atan2(dot).abs();
    if ang > T::FRAC_PI_2() {
        T::PI() - ang
    } else {
        ang
    }
}

/// Pinch points of the traced real amoeba, using polyline tangents.
pub fn pinch_detect<T: Real>(set: &ArcSet<T>) -> Vec<PinchPoint<T>> {
    pinch_scan(set, None, &PinchTolerances::default()).pinches
}

/// Proximity events between log polylines of different arcs, or of distant
/// parts of one arc. With a polynomial the crossing angle uses the exact
/// normal `(x f_x, y f_y)`; otherwise the segment directions.
pub fn pinch_scan<T: Real>(set: &ArcSet<T>, p: Option<&LaurentPoly<T>>, tol: &PinchTolerances) -> PinchScan<T> {
    let mut segs: Vec<Segment<T>> = Vec::new();
    let mut arc_len: Vec<T> = Vec::new();
    for a in &set.arcs {
        let mut s = T::zero();
        for (k, w) in a.log_points.windows(2).enumerate() {
            segs.push(Segment {
                arc: a.id,
                index: k,
                a: w[0],
                b: w[1],
                s,
            });
            s = s + (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
        }
        arc_len.push(s);
    }
    let near = T::lit(tol.near_miss);
    let cell = T::lit(0.25);
    let key = |x: T| (x / cell).floor().to_i64().unwrap_or(0);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, s) in segs.iter().enumerate() {
        let (x0, x1) = (s.a.0.min(s.b.0) - near, s.a.0.max(s.b.0) + near);
        let (y0, y1) = (s.a.1.min(s.b.1) - near, s.a.1.max(s.b.1) + near);
        for i in key(x0)..=key(x1) {
            for j in key(y0)..=key(y1) {
                grid.entry((i, j)).or_default().push(k);
            }
        }
    }
    let sep = T::lit(tol.self_separation);
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut events: Vec<(usize, usize, (T, T), bool)> = Vec::new();
    let mut cells: Vec<_> = grid.into_iter().collect();
    cells.sort_by_key(|c| c.0);
    for (_, members) in cells {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if !seen.insert((i, j)) {
                    continue;
                }
                let (s, t) = (&segs[i], &segs[j]);
                if s.arc == t.arc {
                    let a = &set.arcs[s.arc];
                    let mut gap = (s.s - t.s).abs();
                    if a.closed {
                        gap = gap.min(arc_len[s.arc] - gap);
                    }
                    if gap < sep || s.index.abs_diff(t.index) < 3 {
                        continue;
                    }
                }
                let (d, loc) = seg_seg(s, t);
                if d < near {
                    events.push((i, j, loc, d < T::lit(tol.crossing)));
                }
            }
        }
    }
    let charts: Option<Vec<Chart<T>>> = p.map(|p| set.arcs.iter().map(|a| Chart::new(p, a.quadrant)).collect());
    let mut scan = PinchScan {
        pinches: Vec::new(),
        near_misses: 0,
        tangential: 0,
        coincident: 0,
    };
    // tentacles of different arcs approach each other along side normals
    let normals: Vec<(T, T)> = p
        .and_then(|p| crate::lattice::newton_polygon(p).ok())
        .map(|poly| {
            poly.edges()
                .iter()
                .map(|e| (T::from_i64(e.normal.0).unwrap(), T::from_i64(e.normal.1).unwrap()))
                .collect()
        })
        .unwrap_or_default();
    let tentacle_angle = T::lit(0.05);
    let mut near_locs: Vec<(T, T)> = Vec::new();
    let cluster = T::lit(1e-2);
    for (i, j, loc, crossing) in events {
        let (s, t) = (&segs[i], &segs[j]);
        let alpha = match &charts {
            Some(c) => {
                let g1 = c[s.arc].eval(loc).gauss;
                let g2 = c[t.arc].eval(loc).gauss;
                line_angle(g1, g2)
            }
            None => line_angle((s.b.0 - s.a.0, s.b.1 - s.a.1), (t.b.0 - t.a.0, t.b.1 - t.a.1)),
        };
        if alpha < T::lit(tol.min_alpha) {
            scan.tangential += 1;
            let dir = (s.b.0 - s.a.0, s.b.1 - s.a.1);
            if p.is_some() && !normals.iter().any(|&n| line_angle(dir, n) < tentacle_angle) {
                scan.coincident += 1;
            }
            continue;
        }
        let close = |q: (T, T)| (q.0 - loc.0).hypot(q.1 - loc.1) < cluster;
        if crossing {
            let dup = scan
                .pinches
                .iter()
                .any(|pp| pp.arcs == (s.arc, t.arc) && close(pp.location));
            if !dup {
                scan.pinches.push(PinchPoint {
                    location: loc,
                    arcs: (s.arc, t.arc),
                    indices: (s.index, t.index),
                    alpha,
                });
            }
        } else if !near_locs.iter().any(|&q| close(q)) {
            near_locs.push(loc);
        }
    }
    scan.near_misses = near_locs
        .iter()
        .filter(|&&q| {
            !scan
                .pinches
                .iter()
                .any(|pp| (pp.location.0 - q.0).hypot(pp.location.1 - q.1) < cluster)
        })
        .count();
    scan.pinches.sort_by(|a, b| {
        (a.arcs, a.location.0, a.location.1)
            .partial_cmp(&(b.arcs, b.location.0, b.location.1))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::newton_polygon;
    use crate::tracer::{trace_all, LogWindow, Quadrant, TraceConfig};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn setup(text: &str) -> (LaurentPoly<f64>, NewtonPolygon, ArcSet<f64>) {
        let p: LaurentPoly<f64> = text.parse().unwrap();
        let poly = newton_polygon(&p).unwrap();
        let set = trace_all(&p, &TraceConfig::default()).unwrap();
        (p, poly, set)
    }

    /// Gauss angle of the line along y = -1 - x, integrated in closed form:
    /// `[x : y]` has angle `atan(y / x)`, monotone between the asymptotes.
    fn line_arc_oracle(q: Quadrant) -> f64 {
        match q {
            Quadrant(-1, -1) => FRAC_PI_2,
            _ => FRAC_PI_4,
        }
    }

    #[test]
    fn line_per_arc_values() {
        let (p, poly, set) = setup("1 + x + y");
        let report = total_curvature(&set, &p, &poly, None).unwrap();
        for (a, c) in set.arcs.iter().zip(&report.per_arc) {
            assert!(
                (c.total - line_arc_oracle(a.quadrant)).abs() < 1e-3,
                "{} {}",
                a.quadrant,
                c.total
            );
            assert!(c.inflections.is_empty());
        }
        assert!((report.total - PI).abs() < 1e-3);
        assert!((report.bound - PI).abs() < 1e-15);
        assert!((report.branch_bound - 3.0 * PI).abs() < 1e-12);
        assert!(report.pinches.pinches.is_empty());
        assert!(report.truncation_uncertainty < 1e-3);
    }

    #[test]
    fn orientation_invariance() {
        let (p, _, set) = setup("1 + 2*x - 0.5*y + x*y - 0.7*x^2*y + 0.3*y^2");
        for a in &set.arcs {
            let (t1, _) = arc_total_curvature(a, &p).unwrap();
            let (t2, _) = arc_total_curvature(&a.reversed(), &p).unwrap();
            assert_eq!(t1, t2);
        }
    }

    #[test]
    fn empty_and_circle() {
        let (p, poly, set) = setup("x^2 + y^2 + 1");
        let r = total_curvature(&set, &p, &poly, None).unwrap();
        assert_eq!(r.total, 0.0);
        assert!((r.bound - 4.0 * PI).abs() < 1e-12);
        let (p, poly, set) = setup("x^2 + y^2 - 1");
        let crofton = crofton_total_curvature(&p, &poly, 128, 7).unwrap();
        let r = total_curvature(&set, &p, &poly, Some(crofton)).unwrap();
        // each quarter circle e^{2u} + e^{2v} = 1 turns through pi/2
        assert!((r.total - 2.0 * PI).abs() < 1e-3);
        assert!(r.total < r.bound);
        assert!(r.crofton_gap().unwrap() < 0.05);
        // the four quadrant images coincide: discarded as tangential, not pinches
        assert!(r.pinches.pinches.is_empty());
        assert!(r.pinches.tangential > 0);
    }

    #[test]
    fn crofton_line_and_empty() {
        let p: LaurentPoly<f64> = "1 + x + y".parse().unwrap();
        let poly = newton_polygon(&p).unwrap();
        assert!((crofton_total_curvature(&p, &poly, 64, 1).unwrap() - PI).abs() < 1e-12);
        let p: LaurentPoly<f64> = "x^2 + y^2 + 1".parse().unwrap();
        let poly = newton_polygon(&p).unwrap();
        assert_eq!(crofton_total_curvature(&p, &poly, 64, 1).unwrap(), 0.0);
        assert!(crofton_total_curvature(&p, &poly, 32, 1).is_err());
    }

    fn synthetic(points: Vec<(f64, f64)>, id: usize, q: Quadrant) -> Arc<f64> {
        Arc {
            id,
            quadrant: q,
            points: points.clone(),
            log_points: points,
            closed: false,
            start_exit: None,
            end_exit: None,
        }
    }

    #[test]
    fn right_angle_crossing() {
        let mut set = ArcSet::empty(LogWindow::new(1.0));
        let line = |dir: (f64, f64)| {
            (-10..=10)
                .map(|k| {
                    (
                        0.1 * k as f64 * dir.0 + 0.03 * dir.0,
                        0.1 * k as f64 * dir.1 + 0.03 * dir.1,
                    )
                })
                .collect()
        };
        set.arcs.push(synthetic(line((1.0, 0.0)), 0, Quadrant(1, 1)));
        set.arcs.push(synthetic(line((0.0, 1.0)), 1, Quadrant(-1, 1)));
        let found = pinch_detect(&set);
        assert_eq!(found.len(), 1);
        assert!((found[0].alpha - FRAC_PI_2).abs() < 1e-12);
        assert!(found[0].location.0.abs() < 1e-12 && found[0].location.1.abs() < 1e-12);
    }

    #[test]
    fn turning_point_detection() {
        let steps = [0.1, 0.1, -0.1, -0.1, 0.1];
        assert_eq!(turning_points(&steps, false), vec![2, 4]);
        let tiny = [0.1, -1e-9, 0.1];
        assert!(turning_points(&tiny, false).is_empty());
        // closed loop: up then down, two turns
        let loop_steps = [0.1, 0.1, -0.1, -0.1];
        assert_eq!(turning_points(&loop_steps, true).len(), 2);
        let convex = [0.1; 8];
        assert!(turning_points(&convex, true).is_empty());
    }

    #[test]
    fn convex_oval_turns_once() {
        let p: LaurentPoly<f64> = "x^2 + y^2 - 2*x - 2*y + 1.9".parse().unwrap();
        let arc = crate::tracer::trace_branch(
            &p,
            (1.0 + 0.1f64.sqrt(), 1.0),
            LogWindow::new(12.0),
            &TraceConfig::default(),
        )
        .unwrap();
        let (total, infl) = arc_total_curvature(&arc, &p).unwrap();
        assert!((total - 2.0 * PI).abs() < 1e-6);
        assert!(infl.is_empty());
    }
}
