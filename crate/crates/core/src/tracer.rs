//! Predictor-corrector tracing of the real curve, quadrant by quadrant, directly
//! in logarithmic coordinates.
//!
//! In the open quadrant with signs `(s1, s2)` the curve is the zero set of
//! `F(u, v) = f(s1 e^u, s2 e^v)`, whose gradient is `(x f_x, y f_y)`: the
//! logarithmic Gauss vector. Tracing `F = 0` therefore produces the real amoeba
//! directly, and the step control can bound the Gauss-angle change per step.
//! `F` is evaluated divided by its dominant monomial so nothing overflows inside
//! a wide window.

use std::fmt;

use num_complex::Complex;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gauss::{self, reduce_half_turn, FiberTolerances, RP1Angle};
use crate::lattice::{newton_polygon, NewtonPolygon};
use crate::laurent::{LaurentPoly, Var};
use crate::scalar::Real;
use crate::tentacle::{self, ArcEnd, EdgeRoots, Tentacle, TentacleData, TentacleTolerances};

pub const QUADRANTS: [Quadrant; 4] = [Quadrant(1, 1), Quadrant(-1, 1), Quadrant(-1, -1), Quadrant(1, -1)];

/// Sign pair of an open quadrant of `(R*)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quadrant(pub i8, pub i8);

impl Quadrant {
    pub fn of(x: f64, y: f64) -> Quadrant {
        Quadrant(if x < 0.0 { -1 } else { 1 }, if y < 0.0 { -1 } else { 1 })
    }

    pub fn index(self) -> usize {
        QUADRANTS.iter().position(|&q| q == self).unwrap()
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: i8| if v < 0 { '-' } else { '+' };
        write!(f, "({},{})", s(self.0), s(self.1))
    }
}

impl Serialize for Quadrant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WindowSide {
    Left,
    Right,
    Bottom,
    Top,
}

/// The log-coordinate square `[-w, w]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogWindow<T> {
    pub half_width: T,
}

impl<T: Real> LogWindow<T> {
    pub fn new(half_width: T) -> Self {
        LogWindow { half_width }
    }

    pub fn contains(&self, p: (T, T)) -> bool {
        p.0.abs() <= self.half_width && p.1.abs() <= self.half_width
    }

    fn exit_side(&self, p: (T, T)) -> WindowSide {
        let w = self.half_width;
        let excess = [
            (-w - p.0, WindowSide::Left),
            (p.0 - w, WindowSide::Right),
            (-w - p.1, WindowSide::Bottom),
            (p.1 - w, WindowSide::Top),
        ];
        excess
            .iter()
            .copied()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap()
            .1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arc<T> {
    pub id: usize,
    pub quadrant: Quadrant,
    pub points: Vec<(T, T)>,
    pub log_points: Vec<(T, T)>,
    pub closed: bool,
    pub start_exit: Option<WindowSide>,
    pub end_exit: Option<WindowSide>,
}

impl<T: Real> Arc<T> {
    pub fn length(&self) -> T {
        self.log_points
            .windows(2)
            .fold(T::zero(), |acc, w| acc + dist(w[0], w[1]))
    }

    pub fn reversed(&self) -> Arc<T> {
        let mut a = self.clone();
        a.points.reverse();
        a.log_points.reverse();
        std::mem::swap(&mut a.start_exit, &mut a.end_exit);
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub arcs: Vec<usize>,
    pub compact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcSet<T> {
    pub arcs: Vec<Arc<T>>,
    pub window: LogWindow<T>,
    /// Every open arc end, in arc order (start before end).
    pub ends: Vec<ArcEnd<T>>,
    /// Side and boundary-root assignment of each end, when assignment succeeded.
    pub tentacle_data: Vec<TentacleData<T>>,
    /// Ends glued into real boundary points.
    pub tentacles: Vec<Tentacle>,
    /// Ends that matched no real boundary root.
    pub loose_ends: Vec<usize>,
    pub edge_roots: Option<EdgeRoots<T>>,
    /// Components of the real curve after gluing across the boundary.
    pub components: Vec<Component>,
    /// Set when ends could not be assigned to sides (window too small).
    pub tentacle_error: Option<String>,
    /// Set when equal-sign boundary roots or more than two ends crowd one point.
    pub gluing_ambiguous: bool,
    /// Interior points whose polyline tangent is not orthogonal to the Gauss vector.
    pub tangent_failures: usize,
}

impl<T: Real> ArcSet<T> {
    pub fn empty(window: LogWindow<T>) -> Self {
        ArcSet {
            arcs: Vec::new(),
            window,
            ends: Vec::new(),
            tentacle_data: Vec::new(),
            tentacles: Vec::new(),
            loose_ends: Vec::new(),
            edge_roots: None,
            components: Vec::new(),
            tentacle_error: None,
            gluing_ambiguous: false,
            tangent_failures: 0,
        }
    }

    /// Compact components of the real amoeba (ovals), the `p` of the counting
    /// arguments.
    pub fn compact_components(&self) -> usize {
        self.components.iter().filter(|c| c.compact).count()
    }

    /// Real boundary points witnessed by tentacles: glued groups plus loose ends.
    pub fn tentacle_count(&self) -> usize {
        self.tentacles.len() + self.loose_ends.len()
    }

    /// Tentacles seen from one side only. A real boundary point is crossed by
    /// two branches, so the other one runs outside the window.
    pub fn unpaired_tentacles(&self) -> usize {
        self.tentacles.iter().filter(|t| t.ends.len() < 2).count()
    }

    pub fn open_arcs(&self) -> usize {
        self.arcs.iter().filter(|a| !a.closed).count()
    }

    pub fn total_length(&self) -> T {
        self.arcs.iter().fold(T::zero(), |acc, a| acc + a.length())
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            arcs: self.arcs.len(),
            components: self.components.len(),
            p: self.compact_components(),
            tentacle_count: self.tentacle_count(),
            open_ends: self.ends.len(),
            gluing_ambiguous: self.gluing_ambiguous,
            tentacle_error: self.tentacle_error.clone(),
        }
    }

    /// `arc,quadrant,x,y,u,v` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("arc,quadrant,x,y,u,v\n");
        for a in &self.arcs {
            for (p, l) in a.points.iter().zip(&a.log_points) {
                out.push_str(&format!(
                    "{},{},{:e},{:e},{:e},{:e}\n",
                    a.id,
                    a.quadrant,
                    p.0.to_f64_lossy(),
                    p.1.to_f64_lossy(),
                    l.0.to_f64_lossy(),
                    l.1.to_f64_lossy()
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub arcs: usize,
    pub components: usize,
    pub p: usize,
    pub tentacle_count: usize,
    pub open_ends: usize,
    pub gluing_ambiguous: bool,
    pub tentacle_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceConfig {
    pub window: f64,
    pub grid_n: usize,
    /// Maximal Gauss-angle change per step, radians.
    pub theta_max: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub corrector_tol: f64,
    pub corrector_iters: usize,
    /// Normalized gradient norm below which a point counts as singular.
    pub singular_tol: f64,
    /// Seeds closer than this to an existing arc are not traced again.
    pub merge_tol: f64,
    /// Residual every emitted point must satisfy.
    pub residual_tol: f64,
    /// `|cos|` between polyline tangent and Gauss vector above which a point fails.
    pub tangent_tol: f64,
    pub max_steps: usize,
    pub tentacle: TentacleTolerances,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            window: 12.0,
            grid_n: 32,
            theta_max: 0.02,
            h_init: 0.01,
            h_max: 0.1,
            h_min: 1e-10,
            corrector_tol: 1e-12,
            corrector_iters: 20,
            singular_tol: 1e-10,
            merge_tol: 1e-3,
            residual_tol: 1e-8,
            tangent_tol: 0.05,
            max_steps: 500_000,
            tentacle: TentacleTolerances::default(),
        }
    }
}

/// `F / (dominant monomial)` on one quadrant, in log coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Chart<T> {
    terms: Vec<(T, T, T, T)>,
}

pub(crate) struct ChartValue<T> {
    /// `F / sum |monomials|`, in `[-1, 1]`.
    pub h: T,
    pub grad: (T, T),
    /// Positive multiple of `(x f_x, y f_y)`.
    pub gauss: (T, T),
}

impl<T: Real> Chart<T> {
    pub fn new(p: &LaurentPoly<T>, q: Quadrant) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let mut sign = if t.c < T::zero() { -T::one() } else { T::one() };
                if q.0 < 0 && t.i.rem_euclid(2) == 1 {
                    sign = -sign;
                }
                if q.1 < 0 && t.j.rem_euclid(2) == 1 {
                    sign = -sign;
                }
                (
                    T::from_i32(t.i).unwrap(),
                    T::from_i32(t.j).unwrap(),
                    t.c.abs().ln(),
                    sign,
                )
            })
            .collect();
        Chart { terms }
    }

    pub fn eval(&self, (u, v): (T, T)) -> ChartValue<T> {
        let m = self
            .terms
            .iter()
            .map(|&(i, j, lc, _)| i * u + j * v + lc)
            .fold(T::neg_infinity(), T::max);
        let (mut sw, mut swi, mut swj) = (T::zero(), T::zero(), T::zero());
        let (mut s, mut si, mut sj) = (T::zero(), T::zero(), T::zero());
        for &(i, j, lc, sign) in &self.terms {
            let w = (i * u + j * v + lc - m).exp();
            sw = sw + w;
            swi = swi + w * i;
            swj = swj + w * j;
            s = s + sign * w;
            si = si + sign * w * i;
            sj = sj + sign * w * j;
        }
        let h = s / sw;
        ChartValue {
            h,
            grad: ((si - h * swi) / sw, (sj - h * swj) / sw),
            gauss: (si / sw, sj / sw),
        }
    }

    /// Newton projection onto `F = 0` along the gradient.
    fn correct(&self, mut p: (T, T), cfg: &TraceConfig) -> Option<(T, T)> {
        let target = T::lit(cfg.corrector_tol).max(T::epsilon() * T::lit(64.0));
        for _ in 0..=cfg.corrector_iters {
            let val = self.eval(p);
            if val.h.abs() < target {
                return Some(p);
            }
            let g2 = val.grad.0 * val.grad.0 + val.grad.1 * val.grad.1;
            if !(g2 > T::zero()) {
                return None;
            }
            let k = val.h / g2;
            p = (p.0 - k * val.grad.0, p.1 - k * val.grad.1);
            if !(p.0.is_finite() && p.1.is_finite()) {
                return None;
            }
        }
        None
    }
}

fn dist<T: Real>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn seg_dist<T: Real>(p: (T, T), a: (T, T), b: (T, T)) -> (T, T) {
    let d = (b.0 - a.0, b.1 - a.1);
    let l2 = d.0 * d.0 + d.1 * d.1;
    let t = if l2 > T::zero() {
        (((p.0 - a.0) * d.0 + (p.1 - a.1) * d.1) / l2)
            .max(T::zero())
            .min(T::one())
    } else {
        T::zero()
    };
    (dist(p, (a.0 + t * d.0, a.1 + t * d.1)), t)
}

fn unit<T: Real>(v: (T, T)) -> (T, T) {
    let n = v.0.hypot(v.1);
    (v.0 / n, v.1 / n)
}

fn gauss_angle<T: Real>(g: (T, T)) -> T {
    g.1.atan2(g.0)
}

enum Stop {
    Closed,
    Exit(WindowSide),
}

struct Tracer<'a, T> {
    chart: &'a Chart<T>,
    window: LogWindow<T>,
    cfg: &'a TraceConfig,
}

impl<T: Real> Tracer<'_, T> {
    fn tangent(&self, val: &ChartValue<T>, p: (T, T)) -> Result<(T, T)> {
        let n = val.grad.0.hypot(val.grad.1);
        if !(n >= T::lit(self.cfg.singular_tol)) {
            return Err(Error::Singularity {
                u: p.0.to_f64_lossy(),
                v: p.1.to_f64_lossy(),
            });
        }
        Ok((-val.grad.1 / n, val.grad.0 / n))
    }

    /// Follows the curve from `start` along `dir` until it closes or leaves the
    /// window. The returned points exclude `start`.
    fn run(&self, start: (T, T), dir: (T, T), close_loop: bool) -> Result<(Vec<(T, T)>, Stop)> {
        let cfg = self.cfg;
        let theta_max = T::lit(cfg.theta_max);
        let h_max = T::lit(cfg.h_max);
        let h_min = T::lit(cfg.h_min);
        let mut h = T::lit(cfg.h_init);
        let mut p = start;
        let mut t = dir;
        let mut angle = gauss_angle(self.chart.eval(p).gauss);
        let mut out = Vec::new();
        for _ in 0..cfg.max_steps {
            if h < h_min {
                return Err(Error::CorrectorFailed {
                    u: p.0.to_f64_lossy(),
                    v: p.1.to_f64_lossy(),
                });
            }
            let predicted = (p.0 + h * t.0, p.1 + h * t.1);
            let Some(q) = self.chart.correct(predicted, cfg) else {
                h = h / T::lit(2.0);
                continue;
            };
            let val = self.chart.eval(q);
            let mut tq = self.tangent(&val, q)?;
            if tq.0 * t.0 + tq.1 * t.1 < T::zero() {
                tq = (-tq.0, -tq.1);
            }
            let step = dist(p, q);
            let chord = unit((q.0 - p.0, q.1 - p.1));
            let new_angle = gauss_angle(val.gauss);
            let dtheta = reduce_half_turn(new_angle - angle).abs();
            let aligned = tq.0 * t.0 + tq.1 * t.1 > T::lit(0.9) && chord.0 * t.0 + chord.1 * t.1 > T::lit(0.9);
            if !aligned || step > T::lit(1.5) * h || step < T::lit(0.25) * h || dtheta > theta_max {
                h = h / T::lit(2.0);
                continue;
            }
            if close_loop && out.len() >= 3 {
                let (d, _) = seg_dist(start, p, q);
                let closing = d < T::lit(0.01) * h + T::lit(1e-9) && tq.0 * dir.0 + tq.1 * dir.1 > T::zero();
                if closing {
                    out.push(start);
                    return Ok((out, Stop::Closed));
                }
            }
            out.push(q);
            if !self.window.contains(q) {
                return Ok((out, Stop::Exit(self.window.exit_side(q))));
            }
            p = q;
            t = tq;
            angle = new_angle;
            if dtheta < theta_max / T::lit(4.0) {
                h = (h * T::lit(1.6)).min(h_max);
            }
        }
        Err(Error::CorrectorFailed {
            u: p.0.to_f64_lossy(),
            v: p.1.to_f64_lossy(),
        })
    }
}

fn to_point<T: Real>(q: Quadrant, l: (T, T)) -> (T, T) {
    let sx = if q.0 < 0 { -T::one() } else { T::one() };
    let sy = if q.1 < 0 { -T::one() } else { T::one() };
    (sx * l.0.exp(), sy * l.1.exp())
}

fn trace_in_chart<T: Real>(
    chart: &Chart<T>,
    quadrant: Quadrant,
    seed: (T, T),
    window: LogWindow<T>,
    cfg: &TraceConfig,
) -> Result<Arc<T>> {
    let tracer = Tracer { chart, window, cfg };
    let val = chart.eval(seed);
    let t0 = tracer.tangent(&val, seed)?;
    let (forward, stop) = tracer.run(seed, t0, true)?;
    let (log_points, closed, start_exit, end_exit) = match stop {
        Stop::Closed => {
            let mut pts = vec![seed];
            pts.extend(forward);
            (pts, true, None, None)
        }
        Stop::Exit(side) => {
            let (mut back, bstop) = tracer.run(seed, (-t0.0, -t0.1), false)?;
            let bside = match bstop {
                Stop::Exit(s) => Some(s),
                Stop::Closed => None,
            };
            back.reverse();
            back.push(seed);
            back.extend(forward);
            (back, false, bside, Some(side))
        }
    };
    let points = log_points.iter().map(|&l| to_point(quadrant, l)).collect();
    Ok(Arc {
        id: 0,
        quadrant,
        points,
        log_points,
        closed,
        start_exit,
        end_exit,
    })
}

/// Traces the branch of the real curve through `seed` (a point `(x, y)` of the
/// curve in `(R*)^2`).
pub fn trace_branch<T: Real>(
    p: &LaurentPoly<T>,
    seed: (T, T),
    window: LogWindow<T>,
    cfg: &TraceConfig,
) -> Result<Arc<T>> {
    let (x, y) = seed;
    if x == T::zero() || y == T::zero() {
        return Err(Error::Domain("seed on a coordinate axis".into()));
    }
    let quadrant = Quadrant(if x < T::zero() { -1 } else { 1 }, if y < T::zero() { -1 } else { 1 });
    let chart = Chart::new(p, quadrant);
    let l = chart
        .correct((x.abs().ln(), y.abs().ln()), cfg)
        .ok_or(Error::CorrectorFailed {
            u: x.abs().ln().to_f64_lossy(),
            v: y.abs().ln().to_f64_lossy(),
        })?;
    trace_in_chart(&chart, quadrant, l, window, cfg)
}

/// Curve points on the log grid lines and on four Gauss fibers, as
/// `(quadrant, log point)` pairs already projected onto the curve.
pub fn seed_points<T: Real>(
    p: &LaurentPoly<T>,
    window: LogWindow<T>,
    grid_n: usize,
    cfg: &TraceConfig,
) -> Result<Vec<(Quadrant, (T, T))>> {
    if grid_n < 8 {
        return Err(Error::Parameter(format!("grid_n must be at least 8, got {grid_n}")));
    }
    let w = window.half_width;
    if !(w > T::zero()) {
        return Err(Error::Parameter("window must be positive".into()));
    }
    let charts: Vec<Chart<T>> = QUADRANTS.iter().map(|&q| Chart::new(p, q)).collect();
    let mut raw: Vec<(Quadrant, (T, T))> = Vec::new();
    let step = T::lit(2.0) * w / T::from_usize(grid_n).unwrap();
    for k in 0..grid_n {
        let c = -w + (T::from_usize(k).unwrap() + T::lit(0.5)) * step;
        for fixed in [Var::X, Var::Y] {
            for sign in [T::one(), -T::one()] {
                let value = Complex::new(sign * c.exp(), T::zero());
                let slice = p.slice(fixed, value)?;
                for r in slice.roots()? {
                    if r.im.abs() > T::lit(1e-9) * r.re.abs() {
                        continue;
                    }
                    let lr = r.re.abs().ln();
                    if lr.abs() > w {
                        continue;
                    }
                    let (x, y) = match fixed {
                        Var::X => (sign, r.re),
                        Var::Y => (r.re, sign),
                    };
                    let l = match fixed {
                        Var::X => (c, lr),
                        Var::Y => (lr, c),
                    };
                    raw.push((Quadrant::of(x.to_f64_lossy(), y.to_f64_lossy()), l));
                }
            }
        }
    }
    if let Ok(poly) = newton_polygon(p) {
        let tol = FiberTolerances::default();
        for k in 0..4 {
            let theta = T::lit(0.1) + T::PI() * T::from_usize(k).unwrap() / T::lit(4.0);
            if let Ok(pts) = gauss::real_fiber_points(p, &poly, RP1Angle::new(theta), &tol) {
                for (x, y) in pts {
                    let l = (x.abs().ln(), y.abs().ln());
                    if window.contains(l) {
                        raw.push((Quadrant::of(x.to_f64_lossy(), y.to_f64_lossy()), l));
                    }
                }
            }
        }
    }
    Ok(raw
        .into_iter()
        .filter_map(|(q, l)| {
            let chart = &charts[q.index()];
            let c = chart.correct(l, cfg)?;
            (chart.eval(c).h.abs() < T::lit(1e-9) && window.contains(c)).then_some((q, c))
        })
        .collect())
}

fn near_arc<T: Real>(arc: &Arc<T>, p: (T, T), tol: T) -> bool {
    arc.log_points.windows(2).any(|w| seg_dist(p, w[0], w[1]).0 < tol)
}

fn tangent_failures<T: Real>(arc: &Arc<T>, chart: &Chart<T>, tol: T) -> usize {
    let lp = &arc.log_points;
    if lp.len() < 3 {
        return 0;
    }
    (1..lp.len() - 1)
        .filter(|&k| {
            let t = unit((lp[k + 1].0 - lp[k - 1].0, lp[k + 1].1 - lp[k - 1].1));
            let g = unit(chart.eval(lp[k]).gauss);
            (t.0 * g.0 + t.1 * g.1).abs() >= tol
        })
        .count()
}

fn arc_ends<T: Real>(arcs: &[Arc<T>]) -> Vec<ArcEnd<T>> {
    let mut ends = Vec::new();
    for a in arcs.iter().filter(|a| !a.closed) {
        let lp = &a.log_points;
        let n = lp.len();
        let back = 10.min(n - 1);
        for at_start in [true, false] {
            let (tip, inner, inner2) = if at_start {
                (lp[0], lp[back], lp[(2 * back).min(n - 1)])
            } else {
                (lp[n - 1], lp[n - 1 - back], lp[(n - 1).saturating_sub(2 * back)])
            };
            let d1 = unit((tip.0 - inner.0, tip.1 - inner.1));
            let d0 = unit((inner.0 - inner2.0, inner.1 - inner2.1));
            let drift = if inner == inner2 {
                T::zero()
            } else {
                (d0.0 * d1.1 - d0.1 * d1.0).atan2(d0.0 * d1.0 + d0.1 * d1.1).abs()
            };
            ends.push(ArcEnd {
                arc: a.id,
                at_start,
                quadrant: (a.quadrant.0, a.quadrant.1),
                point: tip,
                direction: d1,
                drift,
            });
        }
    }
    ends
}

fn find(parent: &mut [usize], k: usize) -> usize {
    let mut r = k;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = k;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

fn components<T: Real>(arcs: &[Arc<T>], ends: &[ArcEnd<T>], tentacles: &[Tentacle]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..arcs.len()).collect();
    for t in tentacles {
        for w in t.ends.windows(2) {
            let a = find(&mut parent, ends[w[0]].arc);
            let b = find(&mut parent, ends[w[1]].arc);
            if a != b {
                parent[b.max(a)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Component> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for k in 0..arcs.len() {
        let r = find(&mut parent, k);
        match roots.iter().position(|&x| x == r) {
            Some(pos) => out[pos].arcs.push(k),
            None => {
                roots.push(r);
                out.push(Component {
                    arcs: vec![k],
                    compact: true,
                });
            }
        }
    }
    for c in out.iter_mut() {
        c.compact = c.arcs.iter().all(|&a| arcs[a].closed);
    }
    out
}

/// Traces every branch of the real curve inside the window and glues the
/// pieces across the toric boundary.
pub fn trace_all<T: Real>(p: &LaurentPoly<T>, cfg: &TraceConfig) -> Result<ArcSet<T>> {
    let window = LogWindow::new(T::lit(cfg.window));
    let seeds = seed_points(p, window, cfg.grid_n, cfg)?;
    let merge = T::lit(cfg.merge_tol);
    let tangent_tol = T::lit(cfg.tangent_tol);
    let charts: Vec<Chart<T>> = QUADRANTS.iter().map(|&q| Chart::new(p, q)).collect();
    let mut arcs: Vec<Arc<T>> = Vec::new();
    let mut failures = 0;
    for (q, seed) in seeds {
        if arcs.iter().any(|a| a.quadrant == q && near_arc(a, seed, merge)) {
            continue;
        }
        let chart = &charts[q.index()];
        let mut arc = trace_in_chart(chart, q, seed, window, cfg)?;
        let mut bad = tangent_failures(&arc, chart, tangent_tol);
        if bad > 0 {
            let finer = TraceConfig {
                theta_max: cfg.theta_max / 2.0,
                h_max: cfg.h_max / 2.0,
                ..*cfg
            };
            let retry = trace_in_chart(chart, q, seed, window, &finer)?;
            let bad_retry = tangent_failures(&retry, chart, tangent_tol);
            if bad_retry < bad {
                arc = retry;
                bad = bad_retry;
            }
        }
        failures += bad;
        arcs.push(arc);
    }
    canonical_order(&mut arcs);
    let mut set = ArcSet::empty(window);
    set.tangent_failures = failures;
    set.ends = arc_ends(&arcs);
    set.arcs = arcs;
    let poly = newton_polygon(p)?;
    glue_ends(&mut set, p, &poly, &cfg.tentacle)?;
    Ok(set)
}

fn canonical_order<T: Real>(arcs: &mut [Arc<T>]) {
    for a in arcs.iter_mut() {
        // open arcs read from their lexicographically smaller end
        if !a.closed {
            let (f, l) = (a.log_points[0], *a.log_points.last().unwrap());
            if (l.0, l.1).partial_cmp(&(f.0, f.1)) == Some(std::cmp::Ordering::Less) {
                *a = a.reversed();
            }
        }
    }
    arcs.sort_by(|a, b| {
        let ka = (a.quadrant.index(), a.log_points[0].0, a.log_points[0].1);
        let kb = (b.quadrant.index(), b.log_points[0].0, b.log_points[0].1);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    for (k, a) in arcs.iter_mut().enumerate() {
        a.id = k;
    }
}

fn glue_ends<T: Real>(
    set: &mut ArcSet<T>,
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    tol: &TentacleTolerances,
) -> Result<()> {
    let edge = tentacle::edge_roots(p, poly, T::lit(tol.ambiguity))?;
    match tentacle::assign_ends(&set.ends, poly, &edge, tol) {
        Ok(data) => {
            let (groups, loose) = tentacle::glue(&data, &edge);
            set.gluing_ambiguous = edge.ambiguous || groups.iter().any(|g| g.ends.len() > 2);
            set.components = components(&set.arcs, &set.ends, &groups);
            set.tentacle_data = data;
            set.tentacles = groups;
            set.loose_ends = loose;
        }
        Err(e) => {
            set.tentacle_error = Some(e.to_string());
            set.components = components(&set.arcs, &set.ends, &[]);
            set.loose_ends = (0..set.ends.len()).collect();
        }
    }
    set.edge_roots = Some(edge);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn poly(text: &str) -> LaurentPoly<f64> {
        text.parse().unwrap()
    }

    #[test]
    fn chart_matches_direct_evaluation() {
        let p = poly("1 - 2*x + 0.5*x*y^2 + y^-1");
        for q in QUADRANTS {
            let chart = Chart::new(&p, q);
            let l = (0.3, -0.7);
            let (x, y) = to_point(q, l);
            let val = chart.eval(l);
            let f = p.eval_real(x, y);
            let scale = p.magnitude(Complex::new(x, 0.0), Complex::new(y, 0.0));
            assert!((val.h - f / scale).abs() < 1e-14);
            let (a, b) = p.log_gauss_pair();
            let g = (a.eval_real(x, y) / scale, b.eval_real(x, y) / scale);
            assert!((val.gauss.0 - g.0).abs() < 1e-14 && (val.gauss.1 - g.1).abs() < 1e-14);
        }
    }

    #[test]
    fn line_seeds_in_three_quadrants() {
        let cfg = TraceConfig::default();
        let seeds = seed_points(&poly("1 + x + y"), LogWindow::new(3.0), 16, &cfg).unwrap();
        let mut qs: Vec<Quadrant> = seeds.iter().map(|s| s.0).collect();
        qs.sort();
        qs.dedup();
        assert_eq!(qs, vec![Quadrant(-1, -1), Quadrant(-1, 1), Quadrant(1, -1)]);
        assert!(seed_points(&poly("x^2 + y^2 + 1"), LogWindow::new(3.0), 16, &cfg)
            .unwrap()
            .is_empty());
        let seeds = seed_points(&poly("x^2 + y^2 - 1"), LogWindow::new(3.0), 16, &cfg).unwrap();
        let mut qs: Vec<Quadrant> = seeds.iter().map(|s| s.0).collect();
        qs.sort();
        qs.dedup();
        assert_eq!(qs.len(), 4);
        assert!(seed_points(&poly("1 + x + y"), LogWindow::new(3.0), 4, &cfg).is_err());
    }

    #[test]
    fn line_branch_through_half_half() {
        let cfg = TraceConfig::default();
        let arc = trace_branch(&poly("1 + x + y"), (-0.5, -0.5), LogWindow::new(12.0), &cfg).unwrap();
        assert_eq!(arc.quadrant, Quadrant(-1, -1));
        assert!(!arc.closed);
        assert!(arc.start_exit.is_some() && arc.end_exit.is_some());
        assert!(arc
            .log_points
            .iter()
            .any(|l| (l.0 + LN_2).abs() < 1e-12 && (l.1 + LN_2).abs() < 1e-12));
        let arc = trace_branch(&poly("1 + x + y"), (-2.0, 1.0), LogWindow::new(12.0), &cfg).unwrap();
        assert_eq!(arc.quadrant, Quadrant(-1, 1));
    }

    #[test]
    fn circle_quarter_exits_downwards_and_leftwards() {
        let cfg = TraceConfig::default();
        let arc = trace_branch(
            &poly("x^2 + y^2 - 1"),
            (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            LogWindow::new(12.0),
            &cfg,
        )
        .unwrap();
        assert_eq!(arc.quadrant, Quadrant(1, 1));
        let mut exits = vec![arc.start_exit.unwrap(), arc.end_exit.unwrap()];
        exits.sort_by_key(|s| *s as u8);
        assert_eq!(exits, vec![WindowSide::Left, WindowSide::Bottom]);
        // the quarter circle maps onto e^{2u} + e^{2v} = 1
        for l in &arc.log_points {
            assert!(((2.0 * l.0).exp() + (2.0 * l.1).exp() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_oval() {
        // an oval in the positive quadrant around (1, 1)
        let p = poly("x^2 + y^2 - 2*x - 2*y + 1.9");
        let arc = trace_branch(
            &p,
            (1.0 + 0.1f64.sqrt(), 1.0),
            LogWindow::new(12.0),
            &TraceConfig::default(),
        )
        .unwrap();
        assert!(arc.closed);
        assert_eq!(arc.log_points.first(), arc.log_points.last());
    }

    #[test]
    fn trace_all_line() {
        let set = trace_all(&poly("1 + x + y"), &TraceConfig::default()).unwrap();
        assert_eq!(set.arcs.len(), 3);
        assert_eq!(set.components.len(), 1);
        assert_eq!(set.compact_components(), 0);
        assert_eq!(set.tentacle_count(), 3);
        assert_eq!(set.ends.len(), 6);
        assert!(set.tentacles.iter().all(|t| t.ends.len() == 2));
        assert!(set.tentacle_error.is_none());
        assert!(!set.gluing_ambiguous);
        assert_eq!(set.tangent_failures, 0);
    }

    #[test]
    fn trace_all_empty_and_circle() {
        let set = trace_all(&poly("x^2 + y^2 + 1"), &TraceConfig::default()).unwrap();
        assert!(set.arcs.is_empty());
        assert_eq!((set.compact_components(), set.tentacle_count()), (0, 0));
        let set = trace_all(&poly("x^2 + y^2 - 1"), &TraceConfig::default()).unwrap();
        assert_eq!(set.arcs.len(), 4);
        assert_eq!(set.ends.len(), 8);
        assert_eq!(set.tentacle_count(), 4);
        assert_eq!(set.components.len(), 1);
    }

    #[test]
    fn residuals_and_step_bound() {
        let cfg = TraceConfig::default();
        let p = poly("1 + 2*x - 0.5*y + x*y - 0.7*x^2*y + 0.3*y^2");
        let set = trace_all(&p, &cfg).unwrap();
        assert!(!set.arcs.is_empty());
        for a in &set.arcs {
            let chart = Chart::new(&p, a.quadrant);
            for (k, l) in a.log_points.iter().enumerate() {
                assert!(chart.eval(*l).h.abs() < cfg.residual_tol);
                if k > 0 {
                    assert!(dist(a.log_points[k - 1], *l) <= 1.5 * cfg.h_max);
                }
            }
            if !a.closed {
                assert!(!set.window.contains(a.log_points[0]));
                assert!(!set.window.contains(*a.log_points.last().unwrap()));
            }
        }
    }

    #[test]
    fn grid_refinement_keeps_length() {
        let p = poly("x^2 + y^2 - 1 + 0.2*x*y");
        let a = trace_all(&p, &TraceConfig::default()).unwrap();
        let b = trace_all(
            &p,
            &TraceConfig {
                grid_n: 64,
                ..TraceConfig::default()
            },
        )
        .unwrap();
        let (la, lb) = (a.total_length(), b.total_length());
        assert!((la - lb).abs() < 0.01 * la);
    }
}
