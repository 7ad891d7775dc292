//! Rasterized complex amoeba and SVG figures.
//!
//! For a column `u`, the amoeba section is the set of `log|y|` over roots of
//! `f(e^{u + i phi}, y)` as `phi` runs around the circle. Roots move
//! continuously in `phi`, so between two consecutive samples a tracked root
//! attains every modulus between its endpoint moduli; those intervals are
//! filled. Rows are swept the same way with the variables exchanged, and the
//! raster is the union of both sweeps.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::PinchPoint;
use crate::error::{Error, Result};
use crate::lattice::{MomentImage, NewtonPolygon};
use crate::laurent::{LaurentPoly, Var};
use crate::scalar::{cabs, Real};
use crate::tracer::{ArcSet, Quadrant};

/// Axis-aligned rectangle in log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRect<T> {
    pub u_min: T,
    pub u_max: T,
    pub v_min: T,
    pub v_max: T,
}

impl<T: Real> LogRect<T> {
    pub fn square(half_width: T) -> Self {
        LogRect {
            u_min: -half_width,
            u_max: half_width,
            v_min: -half_width,
            v_max: half_width,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.u_max > self.u_min && self.v_max > self.v_min)
    }

    fn transposed(&self) -> Self {
        LogRect {
            u_min: self.v_min,
            u_max: self.v_max,
            v_min: self.u_min,
            v_max: self.u_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmoebaRaster<T> {
    pub window: LogRect<T>,
    pub resolution: (usize, usize),
    /// Row-major, row 0 at `v_min`.
    #[serde(skip)]
    pub bitmap: Vec<bool>,
    pub area_estimate: T,
    pub area_bound: T,
    pub members: usize,
    /// Slices whose degree dropped (roots escaping to infinity).
    pub degenerate_slices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RasterSummary {
    pub area_estimate: f64,
    pub area_bound: f64,
    pub resolution: (usize, usize),
}

impl<T: Real> AmoebaRaster<T> {
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bitmap[j * self.resolution.0 + i]
    }

    pub fn cell_size(&self) -> (T, T) {
        let (nx, ny) = self.resolution;
        (
            (self.window.u_max - self.window.u_min) / T::from_usize(nx.max(1)).unwrap(),
            (self.window.v_max - self.window.v_min) / T::from_usize(ny.max(1)).unwrap(),
        )
    }

    /// Cell containing a log point, if inside the window.
    pub fn cell_of(&self, (u, v): (T, T)) -> Option<(usize, usize)> {
        let (du, dv) = self.cell_size();
        let i = ((u - self.window.u_min) / du).floor().to_i64()?;
        let j = ((v - self.window.v_min) / dv).floor().to_i64()?;
        let (nx, ny) = self.resolution;
        (i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny).then_some((i as usize, j as usize))
    }

    /// Member cell at or next to the cell of `(u, v)`.
    pub fn covers(&self, p: (T, T)) -> bool {
        let Some((i, j)) = self.cell_of(p) else {
            return false;
        };
        let (nx, ny) = self.resolution;
        (i.saturating_sub(1)..=(i + 1).min(nx - 1))
            .any(|a| (j.saturating_sub(1)..=(j + 1).min(ny - 1)).any(|b| self.get(a, b)))
    }

    pub fn summary(&self) -> RasterSummary {
        RasterSummary {
            area_estimate: self.area_estimate.to_f64_lossy(),
            area_bound: self.area_bound.to_f64_lossy(),
            resolution: self.resolution,
        }
    }

    /// Plain PBM (`P1`), top row first.
    pub fn to_pbm(&self) -> String {
        let (nx, ny) = self.resolution;
        let mut out = format!("P1\n{nx} {ny}\n");
        for j in (0..ny).rev() {
            let row: Vec<char> = (0..nx).map(|i| if self.get(i, j) { '1' } else { '0' }).collect();
            for chunk in row.chunks(70) {
                out.extend(chunk);
                out.push('\n');
            }
        }
        out
    }
}

fn match_roots<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    for (i, za) in a.iter().enumerate() {
        for (j, zb) in b.iter().enumerate() {
            pairs.push((cabs(za - zb), i, j));
        }
    }
    pairs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// `log|y|` intervals swept by the roots of `f(e^{u + i phi}, y)` over one
/// turn of `phi`, and whether the slice degenerated.
fn column_intervals<T: Real>(p: &LaurentPoly<T>, u: T, n_phi: usize) -> (Vec<(T, T)>, bool) {
    let nominal = {
        let (lo, hi) = p.exponent_range(Var::Y);
        (hi - lo) as usize
    };
    let mut degenerate = false;
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    let samples: Vec<Vec<Complex<T>>> = (0..n_phi)
        .map(|k| {
            let phi = two_pi * T::from_usize(k).unwrap() / T::from_usize(n_phi).unwrap();
            let x = Complex::from_polar(u.exp(), phi);
            let roots = p.slice(Var::X, x).and_then(|s| s.roots()).unwrap_or_default();
            if roots.len() < nominal {
                degenerate = true;
            }
            roots
        })
        .collect();
    let logs: Vec<Vec<T>> = samples
        .iter()
        .map(|rs| rs.iter().map(|z| cabs(*z).ln()).collect())
        .collect();
    let mut out = Vec::new();
    for k in 0..n_phi {
        let next = (k + 1) % n_phi;
        for (a, b) in match_roots(&samples[k], &samples[next]) {
            let (la, lb) = (logs[k][a], logs[next][b]);
            out.push((la.min(lb), la.max(lb)));
        }
        for &l in &logs[k] {
            out.push((l, l));
        }
    }
    (out, degenerate)
}

/// Whether `(u, v)` lies in the amoeba, up to `tol` in `v`: some root of
/// `f(e^{u + i phi}, y)` has `log|y|` within `tol` of `v`, tracking roots
/// continuously between the `n_phi` samples.
pub fn membership<T: Real>(p: &LaurentPoly<T>, u: T, v: T, n_phi: usize, tol: T) -> Result<bool> {
    if n_phi < 32 {
        return Err(Error::Parameter(format!("n_phi must be at least 32, got {n_phi}")));
    }
    let (intervals, _) = column_intervals(p, u, n_phi);
    Ok(intervals.iter().any(|&(lo, hi)| v >= lo - tol && v <= hi + tol))
}

/// Connected components of a union of closed intervals.
fn merge_intervals<T: Real>(mut intervals: Vec<(T, T)>) -> Vec<(T, T)> {
    intervals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<(T, T)> = Vec::new();
    for (lo, hi) in intervals {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Sets `col[j]` for every cell center `v_j` inside a swept interval.
fn sweep<T: Real>(
    p: &LaurentPoly<T>,
    rect: &LogRect<T>,
    nu: usize,
    nv: usize,
    n_phi: usize,
) -> (Vec<Vec<bool>>, usize) {
    let du = (rect.u_max - rect.u_min) / T::from_usize(nu).unwrap();
    let dv = (rect.v_max - rect.v_min) / T::from_usize(nv).unwrap();
    let half = T::lit(0.5);
    let cols: Vec<(Vec<bool>, bool)> = (0..nu)
        .into_par_iter()
        .map(|i| {
            let u = rect.u_min + (T::from_usize(i).unwrap() + half) * du;
            let (intervals, degenerate) = column_intervals(p, u, n_phi);
            let mut col = vec![false; nv];
            for (lo, hi) in merge_intervals(intervals) {
                // cells j with lo <= v_min + (j + 1/2) dv <= hi
                let first = ((lo - rect.v_min) / dv - half).ceil().max(T::zero());
                let last = ((hi - rect.v_min) / dv - half).floor();
                let (Some(first), Some(last)) = (first.to_i64(), last.to_i64()) else {
                    continue;
                };
                let last = last.min(nv as i64 - 1);
                for j in first..=last {
                    col[j as usize] = true;
                }
            }
            (col, degenerate)
        })
        .collect();
    let degenerate = cols.iter().filter(|c| c.1).count();
    (cols.into_iter().map(|c| c.0).collect(), degenerate)
}

/// Amoeba raster on the cell-center grid of `rect`.
pub fn rasterize<T: Real>(
    p: &LaurentPoly<T>,
    poly: &NewtonPolygon,
    rect: LogRect<T>,
    resolution: (usize, usize),
    n_phi: usize,
) -> Result<AmoebaRaster<T>> {
    if n_phi < 32 {
        return Err(Error::Parameter(format!("n_phi must be at least 32, got {n_phi}")));
    }
    let (nx, ny) = resolution;
    let area_bound = T::PI() * T::PI() * poly.vol_as::<T>();
    if rect.is_degenerate() || nx == 0 || ny == 0 {
        return Ok(AmoebaRaster {
            window: rect,
            resolution,
            bitmap: vec![false; nx * ny],
            area_estimate: T::zero(),
            area_bound,
            members: 0,
            degenerate_slices: 0,
        });
    }
    let (cols, deg_c) = sweep(p, &rect, nx, ny, n_phi);
    let (rows, deg_r) = sweep(&p.swap(), &rect.transposed(), ny, nx, n_phi);
    let mut bitmap = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            bitmap[j * nx + i] = cols[i][j] || rows[j][i];
        }
    }
    let members = bitmap.iter().filter(|&&b| b).count();
    let cell = (rect.u_max - rect.u_min) * (rect.v_max - rect.v_min) / T::from_usize(nx * ny).unwrap();
    Ok(AmoebaRaster {
        window: rect,
        resolution,
        bitmap,
        area_estimate: cell * T::from_usize(members).unwrap(),
        area_bound,
        members,
        degenerate_slices: deg_c + deg_r,
    })
}

/// Layers of a figure; any subset may be present.
#[derive(Debug, Clone, Copy, Default)]
pub struct Layers<'a, T> {
    pub polygon: Option<&'a NewtonPolygon>,
    pub arcs: Option<&'a ArcSet<T>>,
    pub raster: Option<&'a AmoebaRaster<T>>,
    pub pinches: &'a [PinchPoint<T>],
    /// Points drawn inside the polygon panel, e.g. moment images of arc points.
    pub moment: &'a [MomentImage<T>],
}

const PANEL: f64 = 512.0;
const SIDE: f64 = 256.0;
const GAP: f64 = 24.0;

fn quadrant_color(q: Quadrant) -> &'static str {
    match (q.0, q.1) {
        (1, 1) => "#d62728",
        (-1, 1) => "#1f77b4",
        (-1, -1) => "#2ca02c",
        _ => "#9467bd",
    }
}

/// Deterministic SVG: the main panel shows the window in log coordinates
/// (raster cells, real amoeba polylines, pinch marks); the side panel shows the
/// Newton polygon with its lattice points.
pub fn render_svg<T: Real>(layers: &Layers<'_, T>) -> Result<String> {
    if layers.polygon.is_none() && layers.arcs.is_none() && layers.raster.is_none() {
        return Err(Error::Parameter("render_svg needs at least one layer".into()));
    }
    let rect: LogRect<f64> = match (layers.raster, layers.arcs) {
        (Some(r), _) => LogRect {
            u_min: r.window.u_min.to_f64_lossy(),
            u_max: r.window.u_max.to_f64_lossy(),
            v_min: r.window.v_min.to_f64_lossy(),
            v_max: r.window.v_max.to_f64_lossy(),
        },
        (None, Some(a)) => LogRect::square(a.window.half_width.to_f64_lossy()),
        _ => LogRect::square(1.0),
    };
    let sx = PANEL / (rect.u_max - rect.u_min).max(f64::MIN_POSITIVE);
    let sy = PANEL / (rect.v_max - rect.v_min).max(f64::MIN_POSITIVE);
    let px = |u: f64| (u - rect.u_min) * sx;
    let py = |v: f64| PANEL - (v - rect.v_min) * sy;
    let width = PANEL + GAP + SIDE;
    let mut s = String::new();
    let w = |s: &mut String, text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    w(&mut s, r#"<?xml version="1.0" encoding="UTF-8"?>"#.into());
    w(
        &mut s,
        format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{PANEL}" viewBox="0 0 {width} {PANEL}">"#
        ),
    );
    w(
        &mut s,
        format!(r##"<rect x="0" y="0" width="{PANEL}" height="{PANEL}" fill="#ffffff" stroke="#000000"/>"##),
    );
    if let Some(r) = layers.raster {
        let (nx, ny) = r.resolution;
        let (cw, ch) = (PANEL / nx as f64, PANEL / ny as f64);
        w(&mut s, r##"<g fill="#c8c8c8" stroke="none">"##.into());
        for j in 0..ny {
            let mut i = 0;
            while i < nx {
                if !r.get(i, j) {
                    i += 1;
                    continue;
                }
                let start = i;
                while i < nx && r.get(i, j) {
                    i += 1;
                }
                let y = PANEL - (j + 1) as f64 * ch;
                w(
                    &mut s,
                    format!(
                        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
                        start as f64 * cw,
                        y,
                        (i - start) as f64 * cw,
                        ch
                    ),
                );
            }
        }
        w(&mut s, "</g>".into());
    }
    if let Some(a) = layers.arcs {
        for arc in &a.arcs {
            let pts: Vec<String> = arc
                .log_points
                .iter()
                .map(|&(u, v)| format!("{:.3},{:.3}", px(u.to_f64_lossy()), py(v.to_f64_lossy())))
                .collect();
            w(
                &mut s,
                format!(
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    quadrant_color(arc.quadrant),
                    pts.join(" ")
                ),
            );
        }
    }
    for pinch in layers.pinches {
        let (u, v) = pinch.location;
        w(
            &mut s,
            format!(
                r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="none" stroke="#000000"/>"##,
                px(u.to_f64_lossy()),
                py(v.to_f64_lossy())
            ),
        );
    }
    if let Some(poly) = layers.polygon {
        let ((i0, j0), (i1, j1)) = poly.bounding_box();
        let span = ((i1 - i0).max(j1 - j0).max(1)) as f64;
        let scale = (SIDE - 32.0) / span;
        let ox = PANEL + GAP + 16.0;
        let qx = |i: f64| ox + (i - i0 as f64) * scale;
        let qy = |j: f64| 16.0 + (SIDE - 32.0) - (j - j0 as f64) * scale;
        let pts: Vec<String> = poly
            .vertices()
            .iter()
            .map(|&(i, j)| format!("{:.3},{:.3}", qx(i as f64), qy(j as f64)))
            .collect();
        w(
            &mut s,
            format!(
                r##"<polygon fill="#fff3c4" stroke="#000000" points="{}"/>"##,
                pts.join(" ")
            ),
        );
        for (i, j) in poly.lattice_points() {
            w(
                &mut s,
                format!(
                    r##"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="#000000"/>"##,
                    qx(i as f64),
                    qy(j as f64)
                ),
            );
        }
        if !layers.moment.is_empty() {
            let mut d = String::new();
            for m in layers.moment {
                let (a, b) = (m.point.0.to_f64_lossy(), m.point.1.to_f64_lossy());
                let _ = write!(d, "M{:.3},{:.3}h0.01 ", qx(a), qy(b));
            }
            w(
                &mut s,
                format!(
                    r##"<path fill="none" stroke="#d62728" stroke-linecap="round" stroke-width="2" d="{}"/>"##,
                    d.trim_end()
                ),
            );
        }
    }
    w(&mut s, "</svg>".into());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::newton_polygon;
    use crate::tracer::{trace_all, TraceConfig};
    use std::f64::consts::PI;

    fn setup(text: &str) -> (LaurentPoly<f64>, NewtonPolygon) {
        let p: LaurentPoly<f64> = text.parse().unwrap();
        let poly = newton_polygon(&p).unwrap();
        (p, poly)
    }

    #[test]
    fn line_membership() {
        let (p, _) = setup("1 + x + y");
        // y = -1 - e^{i phi} has |y| in [0, 2]
        assert!(membership(&p, 0.0, 0.0, 64, 0.0).unwrap());
        assert!(membership(&p, 0.0, 0.6, 64, 0.0).unwrap());
        assert!(!membership(&p, 0.0, 0.75, 64, 0.0).unwrap());
        // |y| = |1 + e^{10 + i phi}| is within 1e-4 of e^10
        assert!(!membership(&p, 10.0, 0.0, 64, 0.05).unwrap());
        assert!(membership(&p, 10.0, 10.0, 64, 0.0).unwrap());
        assert!(membership(&p, 0.0, 0.0, 16, 0.0).is_err());
    }

    #[test]
    fn line_area_near_maximal() {
        let (p, poly) = setup("1 + x + y");
        let r = rasterize(&p, &poly, LogRect::square(6.0), (256, 256), 64).unwrap();
        let target = PI * PI / 2.0;
        assert!((r.area_estimate - target).abs() < 0.1 * target, "{}", r.area_estimate);
        assert!(r.area_estimate <= 1.05 * r.area_bound);
    }

    #[test]
    fn symmetric_raster() {
        let (p, poly) = setup("x^2 + y^2 + 1");
        let r = rasterize(&p, &poly, LogRect::square(6.0), (128, 128), 64).unwrap();
        assert!(r.members > 0);
        assert!(r.area_estimate <= 1.05 * r.area_bound);
        for i in 0..128 {
            for j in 0..128 {
                assert_eq!(r.get(i, j), r.get(j, i));
            }
        }
    }

    /// Cell-center sampling of `{(u, v) : e^{2u}, e^{2v}, 1 satisfy the
    /// triangle inequality}`, the amoeba of `x^2 + y^2 + 1`.
    #[test]
    fn matches_closed_form_membership() {
        let (p, poly) = setup("x^2 + y^2 + 1");
        let n = 96;
        let r = rasterize(&p, &poly, LogRect::square(6.0), (n, n), 64).unwrap();
        let h = 12.0 / n as f64;
        let mut disagree = 0;
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (-6.0 + (i as f64 + 0.5) * h, -6.0 + (j as f64 + 0.5) * h);
                let (a, b) = ((2.0 * u).exp(), (2.0 * v).exp());
                let inside = a <= b + 1.0 && b <= a + 1.0 && 1.0 <= a + b;
                disagree += (inside != r.get(i, j)) as usize;
            }
        }
        assert!(disagree <= n / 16, "{disagree}");
    }

    #[test]
    fn refinement_stable() {
        let (p, poly) = setup("1 + x + y");
        let coarse = rasterize(&p, &poly, LogRect::square(6.0), (128, 128), 64).unwrap();
        let fine = rasterize(&p, &poly, LogRect::square(6.0), (256, 256), 128).unwrap();
        assert!((fine.area_estimate - coarse.area_estimate).abs() < 0.03 * fine.area_estimate);
    }

    #[test]
    fn degenerate_window() {
        let (p, poly) = setup("1 + x + y");
        let rect = LogRect {
            u_min: 1.0,
            u_max: 1.0,
            v_min: -1.0,
            v_max: 1.0,
        };
        let r = rasterize(&p, &poly, rect, (16, 16), 64).unwrap();
        assert_eq!(r.area_estimate, 0.0);
    }

    #[test]
    fn real_amoeba_inside_raster() {
        let (p, poly) = setup("1 + x + y");
        let set = trace_all(
            &p,
            &TraceConfig {
                window: 6.0,
                ..TraceConfig::default()
            },
        )
        .unwrap();
        let r = rasterize(&p, &poly, LogRect::square(6.0), (128, 128), 64).unwrap();
        for a in &set.arcs {
            for &l in &a.log_points {
                // the exact criterion holds at every real point
                assert!(membership(&p, l.0, l.1, 64, 1e-9).unwrap(), "{l:?}");
                // tentacles thinner than a cell fall between cell centers
                if l.0.abs() <= 3.0 && l.1.abs() <= 3.0 {
                    assert!(r.covers(l), "{l:?}");
                }
            }
        }
    }

    #[test]
    fn svg_structure() {
        let (p, poly) = setup("1 + x + y");
        let set = trace_all(&p, &TraceConfig::default()).unwrap();
        let svg = render_svg(&Layers {
            polygon: Some(&poly),
            arcs: Some(&set),
            ..Layers::default()
        })
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("<polygon").count(), 1);
        let empty = ArcSet::<f64>::empty(set.window);
        let svg = render_svg(&Layers {
            polygon: Some(&poly),
            arcs: Some(&empty),
            ..Layers::default()
        })
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert!(render_svg::<f64>(&Layers::default()).is_err());
    }

    #[test]
    fn raster_svg_is_run_length_grouped() {
        let (p, poly) = setup("1 + x + y");
        let r = rasterize(&p, &poly, LogRect::square(6.0), (256, 256), 64).unwrap();
        let svg = render_svg(&Layers {
            raster: Some(&r),
            ..Layers::default()
        })
        .unwrap();
        let rects = svg.matches("<rect").count();
        assert!(rects < r.members / 4, "{rects} rects for {} cells", r.members);
        let pbm = r.to_pbm();
        assert!(pbm.starts_with("P1\n256 256\n"));
        assert_eq!(pbm.matches('1').count(), r.members + 1);
    }
}
