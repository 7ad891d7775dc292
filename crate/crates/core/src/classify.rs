//! Simple-Harnack verdict from curvature, fiber and topological evidence.
//!
//! Each signal is a boolean with a firmness flag. A firm value is far enough
//! from its threshold to be trusted; anything within the near-miss band is
//! reported but cannot decide the verdict.

use serde::Serialize;

use crate::curvature::{total_curvature, CurvatureReport};
use crate::error::Result;
use crate::gauss::{self, FiberTolerances, ScanReport};
use crate::lattice::{newton_polygon, LatticeReport, NewtonPolygon};
use crate::laurent::LaurentPoly;
use crate::scalar::Real;
use crate::tentacle::{self, TentacleData, TentacleTolerances};
use crate::tracer::{trace_all, ArcSet, Component, TraceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Harnack,
    NotHarnack,
    Inconclusive,
}

impl Verdict {
    /// Process exit status of the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Harnack => 0,
            Verdict::NotHarnack => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signal {
    pub value: bool,
    pub firm: bool,
}

impl Signal {
    pub fn firm(value: bool) -> Self {
        Signal { value, firm: true }
    }

    pub fn soft(value: bool) -> Self {
        Signal { value, firm: false }
    }

    pub fn firm_true(self) -> bool {
        self.value && self.firm
    }

    pub fn firm_false(self) -> bool {
        !self.value && self.firm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyConfig {
    pub trace: TraceConfig,
    pub theta_samples: usize,
    pub seed: u64,
    pub fiber: FiberTolerances,
    /// Relative gap to the bound still counted as maximal curvature.
    pub curvature_tol: f64,
    /// Near-miss band as a multiple of `curvature_tol`.
    pub near_factor: f64,
    /// Deficient scan samples tolerated before totally-real is firmly false.
    pub deficient_slack: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            trace: TraceConfig::default(),
            theta_samples: 64,
            seed: 0,
            fiber: FiberTolerances::default(),
            curvature_tol: 0.01,
            near_factor: 3.0,
            deficient_slack: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub cond1: Signal,
    pub cond2: Signal,
    pub cond3: Signal,
    pub weak_max_position: Signal,
    /// Component carrying every boundary point, when there is one.
    pub carrier: Option<usize>,
    /// Sides of the boundary points in the order met along the carrier.
    pub cyclic_sides: Vec<usize>,
    /// Glued boundary points per side.
    pub per_side: Vec<usize>,
    /// Integer side lengths `d_i`.
    pub d: Vec<u64>,
    /// Distinct simple real roots of each edge polynomial.
    pub simple_edge_roots: Vec<usize>,
    /// Boundary points on each side are met in monotone intercept order.
    pub side_orders_monotone: bool,
    pub budget_exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub vol: f64,
    pub g: u64,
    pub s: u64,
    pub total_curvature: f64,
    pub bound: f64,
    pub ratio: f64,
    pub crofton_total: Option<f64>,
    pub truncation_uncertainty: f64,
    pub full_real_fraction: Option<f64>,
    pub deficient_samples: Option<usize>,
    /// Most singular points of the curve met by one sampled fiber.
    pub singular_points: Option<usize>,
    pub pinches: usize,
    pub near_misses: usize,
    pub inflections: usize,
    pub components: usize,
    pub p: usize,
    pub t: usize,
    pub open_ends: usize,
    pub gluing_ambiguous: bool,
    pub conditions: Option<Conditions>,
    /// `2 pi g + pi s - 2 pi <= 2 pi p + pi t`, checked when the verdict is Harnack.
    pub lattice_branch_holds: Option<bool>,
    /// `total <= 2 pi p + pi t + 0.05`, checked on smooth inflection-free amoebas.
    pub branch_bound_holds: Option<bool>,
    /// `m_curve, weak maximal position, cond1, smooth` imply `cond2, cond3`.
    pub conditions_consistent: bool,
    /// Firm maximal curvature together with a firm failure of another leg.
    pub contradiction: bool,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackVerdict {
    pub is_m_curve: Signal,
    pub weak_max_position: Signal,
    pub cond1: Signal,
    pub cond2: Signal,
    pub cond3: Signal,
    pub amoeba_smooth: Signal,
    pub max_curvature: Signal,
    pub totally_real: Signal,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Every intermediate product of a classification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification<T> {
    pub lattice: LatticeReport,
    pub arcs: Option<ArcSet<T>>,
    pub curvature: Option<CurvatureReport<T>>,
    pub scan: Option<ScanReport<T>>,
    pub verdict: HarnackVerdict,
}

/// Side and boundary-root assignment of every open arc end.
pub fn tentacle_analysis<T: Real>(
    set: &ArcSet<T>,
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
) -> Result<Vec<TentacleData<T>>> {
    let tol = TentacleTolerances::default();
    let edge = tentacle::edge_roots(p, poly, T::lit(tol.ambiguity))?;
    tentacle::assign_ends(&set.ends, poly, &edge, &tol)
}

/// Glued component count equals `g + 1`.
/// Pairs of real boundary roots on one side with opposite signs and equal modulus.
fn shared_asymptotes<T: Real>(set: &ArcSet<T>) -> usize {
    let Some(edge) = &set.edge_roots else { return 0 };
    let tol = T::lit(TentacleTolerances::default().ambiguity);
    edge.real
        .iter()
        .enumerate()
        .map(|(a, ra)| {
            edge.real[a + 1..]
                .iter()
                .filter(|rb| ra.side == rb.side && ra.sign != rb.sign && (ra.log_modulus - rb.log_modulus).abs() < tol)
                .count()
        })
        .sum()
}

pub fn m_curve_check(components: &[Component], g: u64) -> bool {
    components.len() as u64 == g + 1
}

/// Walks the component through its arcs and glued boundary points, returning
/// the tentacle indices in cyclic order, or `None` if it is not a simple cycle.
fn boundary_cycle<T: Real>(set: &ArcSet<T>, component: &Component) -> Option<Vec<usize>> {
    let tentacle_of_end = |end: usize| set.tentacles.iter().position(|t| t.ends.contains(&end));
    let ends_of_arc = |arc: usize| -> Vec<usize> {
        set.ends
            .iter()
            .enumerate()
            .filter(|(_, e)| e.arc == arc)
            .map(|(k, _)| k)
            .collect()
    };
    let open: Vec<usize> = component
        .arcs
        .iter()
        .copied()
        .filter(|&a| !set.arcs[a].closed)
        .collect();
    let &first = open.first()?;
    let mut order = Vec::new();
    let mut arc = first;
    let mut entry: Option<usize> = None;
    for _ in 0..=open.len() {
        let ends = ends_of_arc(arc);
        if ends.len() != 2 {
            return None;
        }
        let exit = if Some(ends[0]) == entry { ends[1] } else { ends[0] };
        let t = tentacle_of_end(exit)?;
        if set.tentacles[t].ends.len() != 2 {
            return None;
        }
        order.push(t);
        let next = *set.tentacles[t].ends.iter().find(|&&e| e != exit)?;
        arc = set.ends[next].arc;
        entry = Some(next);
        if arc == first {
            break;
        }
    }
    (arc == first && order.len() == open.len()).then_some(order)
}

fn contiguous(sides: &[usize]) -> bool {
    let n = sides.len();
    let mut distinct = sides.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() <= 1 {
        return true;
    }
    let changes = (0..n).filter(|&k| sides[k] != sides[(k + 1) % n]).count();
    changes == distinct.len()
}

/// Group order along the cycle matches the boundary of the polygon in one
/// orientation.
fn matches_boundary(sides: &[usize], n_sides: usize) -> bool {
    let mut groups: Vec<usize> = Vec::new();
    for &s in sides {
        if groups.last() != Some(&s) {
            groups.push(s);
        }
    }
    while groups.len() > 1 && groups.first() == groups.last() {
        groups.pop();
    }
    if groups.len() != n_sides {
        return false;
    }
    let forward = (0..n_sides).all(|k| groups[(k + 1) % n_sides] == (groups[k] + 1) % n_sides);
    let backward = (0..n_sides).all(|k| groups[k] == (groups[(k + 1) % n_sides] + 1) % n_sides);
    forward || backward
}

/// Boundary-position conditions: one component carries every boundary point,
/// the points of each side are contiguous along it, and the sides appear in
/// the cyclic order of the polygon.
pub fn check_conditions<T: Real>(set: &ArcSet<T>, poly: &NewtonPolygon) -> Conditions {
    let n_sides = poly.edges().len();
    let d: Vec<u64> = poly.edges().iter().map(|e| e.d).collect();
    let mut per_side = vec![0usize; n_sides];
    for t in &set.tentacles {
        per_side[t.side] += 1;
    }
    let simple_edge_roots = set
        .edge_roots
        .as_ref()
        .map(|e| e.simple_real_per_side.clone())
        .unwrap_or_else(|| vec![0; n_sides]);
    let sum_d: u64 = d.iter().sum();
    let budget_exceeded = per_side.iter().zip(&d).any(|(&c, &di)| c as u64 > di);
    // a side whose edge polynomial lacks d_i simple real roots cannot be in
    // weak maximal position, whatever the tracer saw
    let edge_complete = simple_edge_roots.iter().zip(&d).all(|(&r, &di)| r as u64 == di);
    let reliable = set.tentacle_error.is_none()
        && set.loose_ends.is_empty()
        && set.unpaired_tentacles() == 0
        && !set.gluing_ambiguous
        && !budget_exceeded
        && set.tentacles.len() as u64 == sum_d;
    let weak = edge_complete && per_side.iter().zip(&d).all(|(&c, &di)| c as u64 == di) && reliable;
    let firm = !edge_complete || reliable;
    let weak_max_position = Signal { value: weak, firm };
    let carrier = set.components.iter().position(|c| {
        !set.tentacles.is_empty()
            && set
                .tentacles
                .iter()
                .all(|t| t.ends.iter().all(|&e| c.arcs.contains(&set.ends[e].arc)))
    });
    let cond1_value = weak && carrier.is_some();
    let cycle = carrier.and_then(|c| boundary_cycle(set, &set.components[c]));
    let cyclic_sides: Vec<usize> = cycle
        .as_ref()
        .map(|o| o.iter().map(|&t| set.tentacles[t].side).collect())
        .unwrap_or_default();
    let cond2_value = cond1_value && cycle.is_some() && contiguous(&cyclic_sides);
    let cond3_value = cond2_value && matches_boundary(&cyclic_sides, n_sides);
    let side_orders_monotone = cycle.as_ref().is_some_and(|o| {
        (0..n_sides).all(|side| {
            let vals: Vec<T> = o
                .iter()
                .filter(|&&t| set.tentacles[t].side == side)
                .map(|&t| {
                    let root = set.tentacles[t].root;
                    set.edge_roots
                        .as_ref()
                        .map(|e| e.real[root].log_modulus)
                        .unwrap_or(T::zero())
                })
                .collect();
            vals.windows(2).all(|w| w[0] <= w[1]) || vals.windows(2).all(|w| w[0] >= w[1])
        })
    });
    Conditions {
        cond1: Signal {
            value: cond1_value,
            firm,
        },
        cond2: Signal {
            value: cond2_value,
            firm,
        },
        cond3: Signal {
            value: cond3_value,
            firm,
        },
        weak_max_position,
        carrier,
        cyclic_sides,
        per_side,
        d,
        simple_edge_roots,
        side_orders_monotone,
        budget_exceeded,
    }
}

/// Runs the full pipeline and returns the verdict only.
pub fn classify<T: Real>(p: &LaurentPoly<T>, config: &ClassifyConfig) -> Result<HarnackVerdict> {
    Ok(classify_full(p, config)?.verdict)
}

/// Runs lattice, tracing, curvature, fiber scan and boundary analysis.
/// Failures of individual stages become reasons for an inconclusive verdict;
/// only an invalid polynomial is an error.
pub fn classify_full<T: Real>(p: &LaurentPoly<T>, config: &ClassifyConfig) -> Result<Classification<T>> {
    let poly = newton_polygon(p)?;
    let mut reasons = Vec::new();
    let scan = match gauss::totally_real_scan(p, &poly, config.theta_samples, config.seed, &config.fiber) {
        Ok(s) => Some(s),
        Err(e) => {
            reasons.push(format!("fiber scan: {e}"));
            None
        }
    };
    let arcs = match trace_all(p, &config.trace) {
        Ok(a) => Some(a),
        Err(e) => {
            reasons.push(format!("tracing: {e}"));
            None
        }
    };
    let crofton = scan.as_ref().map(gauss::crofton_from_scan);
    let curvature = match &arcs {
        Some(a) => match total_curvature(a, p, &poly, crofton) {
            Ok(c) => Some(c),
            Err(e) => {
                reasons.push(format!("curvature: {e}"));
                None
            }
        },
        None => None,
    };
    let verdict = decide(&poly, arcs.as_ref(), curvature.as_ref(), scan.as_ref(), config, reasons);
    Ok(Classification {
        lattice: poly.report(),
        arcs,
        curvature,
        scan,
        verdict,
    })
}

fn decide<T: Real>(
    poly: &NewtonPolygon,
    arcs: Option<&ArcSet<T>>,
    curvature: Option<&CurvatureReport<T>>,
    scan: Option<&ScanReport<T>>,
    config: &ClassifyConfig,
    mut reasons: Vec<String>,
) -> HarnackVerdict {
    let f = |x: T| x.to_f64_lossy();
    let bound: f64 = f(crate::lattice::curvature_bound::<T>(poly));
    let (g, s) = (poly.g(), poly.s());

    let max_curvature = match curvature {
        Some(c) => {
            let ratio = f(c.ratio());
            // curvature lost past the window edge can only raise the total
            let upper = if bound > 0.0 {
                (f(c.total) + f(c.truncation_uncertainty)) / bound
            } else {
                0.0
            };
            let tol = config.curvature_tol;
            let unpaired = arcs.map_or(0, |a| a.unpaired_tentacles());
            if ratio >= 1.0 - tol {
                Signal::firm(true)
            } else if unpaired > 0 {
                reasons.push(format!("{unpaired} tentacles continue outside the window"));
                Signal::soft(false)
            } else if upper < 1.0 - config.near_factor * tol {
                Signal::firm(false)
            } else {
                reasons.push(format!("curvature ratio {ratio:.4} in the near-miss band"));
                Signal::soft(false)
            }
        }
        None => Signal::soft(false),
    };

    let totally_real = match scan {
        Some(sc) => {
            let deficient = sc.deficient();
            if sc.totally_real {
                Signal::firm(true)
            } else if deficient > config.deficient_slack {
                Signal::firm(false)
            } else {
                reasons.push(format!("{deficient} deficient fiber samples"));
                Signal::soft(false)
            }
        }
        None => Signal::soft(false),
    };

    let singular = scan.map_or(0, |s| s.singular_points);
    if singular > 0 {
        reasons.push(format!(
            "curve is singular: {singular} points with vanishing Gauss vector"
        ));
    }
    let amoeba_smooth = match (curvature, arcs) {
        _ if singular > 0 => Signal::soft(false),
        (Some(c), Some(a)) => {
            if !c.pinches.pinches.is_empty() {
                Signal::firm(false)
            } else if c.pinches.coincident > 0 {
                // distinct branches touching or sharing an image: not an embedded curve
                reasons.push(format!(
                    "{} tangential or coincident branch contacts",
                    c.pinches.coincident
                ));
                Signal::soft(false)
            } else if shared_asymptotes(a) > 0 {
                // opposite-sign boundary roots of equal modulus: two tentacles
                // on one asymptote, the limit of a pinch pushed to infinity
                reasons.push(format!(
                    "{} pairs of tentacles share an asymptote",
                    shared_asymptotes(a)
                ));
                Signal::soft(false)
            } else if c.pinches.near_misses > 0 || a.tangent_failures > 0 {
                reasons.push(format!(
                    "{} near pinches, {} tangent-check failures",
                    c.pinches.near_misses, a.tangent_failures
                ));
                Signal::soft(true)
            } else {
                Signal::firm(true)
            }
        }
        _ => Signal::soft(false),
    };

    let conditions = arcs.map(|a| check_conditions(a, poly));
    let is_m_curve = match arcs {
        Some(a) => {
            let value = m_curve_check(&a.components, g);
            let firm = !a.gluing_ambiguous && a.tentacle_error.is_none() && a.loose_ends.is_empty();
            if !firm {
                reasons.push("component gluing is ambiguous or incomplete".into());
            }
            Signal { value, firm }
        }
        None => Signal::soft(false),
    };
    if let Some(a) = arcs {
        if let Some(e) = &a.tentacle_error {
            reasons.push(format!("tentacles: {e}"));
        }
    }
    let (cond1, cond2, cond3, weak_max_position) = match &conditions {
        Some(c) => {
            if c.budget_exceeded {
                reasons.push("more boundary points on a side than its lattice length".into());
            }
            (c.cond1, c.cond2, c.cond3, c.weak_max_position)
        }
        None => (
            Signal::soft(false),
            Signal::soft(false),
            Signal::soft(false),
            Signal::soft(false),
        ),
    };

    let legs = [totally_real, amoeba_smooth, is_m_curve, cond1, cond2, cond3];
    let contradiction = max_curvature.firm_true() && legs.iter().any(|l| l.firm_false());
    let verdict = if max_curvature.firm_true() && legs.iter().all(|l| l.firm_true()) {
        Verdict::Harnack
    } else if max_curvature.firm_false() && totally_real.firm_false() {
        Verdict::NotHarnack
    } else {
        if contradiction {
            reasons.push("maximal curvature disagrees with another leg".into());
        }
        if max_curvature.firm_false() && totally_real.firm_true() {
            reasons.push("totally real fibers without maximal curvature".into());
        }
        Verdict::Inconclusive
    };

    let conditions_consistent = !(is_m_curve.value && weak_max_position.value && cond1.value && amoeba_smooth.value)
        || (cond2.value && cond3.value);
    let (p_count, t_count) = arcs
        .map(|a| (a.compact_components(), a.tentacle_count()))
        .unwrap_or((0, 0));
    let lattice_branch_holds =
        (verdict == Verdict::Harnack).then(|| 2 * g as i64 + s as i64 - 2 <= 2 * p_count as i64 + t_count as i64);
    let branch_bound_holds = curvature.and_then(|c| {
        (c.pinches.pinches.is_empty() && c.inflections == 0).then(|| f(c.total) <= f(c.branch_bound) + 0.05)
    });

    HarnackVerdict {
        is_m_curve,
        weak_max_position,
        cond1,
        cond2,
        cond3,
        amoeba_smooth,
        max_curvature,
        totally_real,
        verdict,
        evidence: Evidence {
            vol: f(poly.vol_as::<T>()),
            g,
            s,
            total_curvature: curvature.map(|c| f(c.total)).unwrap_or(0.0),
            bound,
            ratio: curvature.map(|c| f(c.ratio())).unwrap_or(0.0),
            crofton_total: curvature.and_then(|c| c.crofton_total.map(f)),
            truncation_uncertainty: curvature.map(|c| f(c.truncation_uncertainty)).unwrap_or(0.0),
            full_real_fraction: scan.map(|s| f(s.full_real_fraction)),
            deficient_samples: scan.map(|s| s.deficient()),
            singular_points: scan.map(|s| s.singular_points),
            pinches: curvature.map(|c| c.pinches.pinches.len()).unwrap_or(0),
            near_misses: curvature.map(|c| c.pinches.near_misses).unwrap_or(0),
            inflections: curvature.map(|c| c.inflections).unwrap_or(0),
            components: arcs.map(|a| a.components.len()).unwrap_or(0),
            p: p_count,
            t: t_count,
            open_ends: arcs.map(|a| a.ends.len()).unwrap_or(0),
            gluing_ambiguous: arcs.is_some_and(|a| a.gluing_ambiguous),
            conditions,
            lattice_branch_holds,
            branch_bound_holds,
            conditions_consistent,
            contradiction,
            reasons,
        },
    }
}
