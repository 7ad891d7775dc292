//! Newton polygons and their lattice invariants.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{collinear, LaurentPoly};
use crate::scalar::Real;

pub type LatticePoint = (i64, i64);

/// One side of the polygon, oriented counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: LatticePoint,
    pub to: LatticePoint,
    /// Primitive direction `(to - from) / d`.
    pub direction: LatticePoint,
    /// Primitive outward normal.
    pub normal: LatticePoint,
    /// Integer length: number of lattice segments on the side.
    pub d: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    vertices: Vec<LatticePoint>,
    edges: Vec<Edge>,
    vol: Ratio<i64>,
    g: u64,
    s: u64,
}

fn cross(o: LatticePoint, a: LatticePoint, b: LatticePoint) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; strict turns only, so collinear points are dropped.
fn convex_hull(points: &[LatticePoint]) -> Vec<LatticePoint> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<LatticePoint> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

impl NewtonPolygon {
    /// Convex hull of the given lattice points with every invariant filled in.
    pub fn from_points(points: &[LatticePoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        if collinear(points) {
            return Err(Error::DegenerateSupport);
        }
        let vertices = convex_hull(points);
        let n = vertices.len();
        let edges = (0..n)
            .map(|k| {
                let from = vertices[k];
                let to = vertices[(k + 1) % n];
                let (dx, dy) = (to.0 - from.0, to.1 - from.1);
                let d = dx.abs().gcd(&dy.abs());
                Edge {
                    from,
                    to,
                    direction: (dx / d, dy / d),
                    normal: (dy / d, -dx / d),
                    d: d as u64,
                }
            })
            .collect();
        let twice_area: i64 = (0..n)
            .map(|k| {
                let (a, b) = (vertices[k], vertices[(k + 1) % n]);
                a.0 * b.1 - a.1 * b.0
            })
            .sum();
        let mut poly = NewtonPolygon {
            vertices,
            edges,
            vol: Ratio::new(twice_area, 2),
            g: 0,
            s: 0,
        };
        let (g, s) = lattice_counts(&poly);
        poly.g = g;
        poly.s = s;
        Ok(poly)
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Euclidean area, exact.
    pub fn vol(&self) -> Ratio<i64> {
        self.vol
    }

    /// Interior lattice points; the genus of a smooth curve with this polygon.
    pub fn g(&self) -> u64 {
        self.g
    }

    /// Boundary lattice points.
    pub fn s(&self) -> u64 {
        self.s
    }

    /// `2 vol`, the degree of the logarithmic Gauss map.
    pub fn gauss_degree(&self) -> u64 {
        (self.vol * 2).to_integer() as u64
    }

    pub fn vol_as<T: Real>(&self) -> T {
        T::from_i64(*self.vol.numer()).unwrap() / T::from_i64(*self.vol.denom()).unwrap()
    }

    pub fn pick_ok(&self) -> bool {
        self.vol == Ratio::from_integer(self.g as i64) + Ratio::new(self.s as i64, 2) - 1
    }

    pub fn bounding_box(&self) -> (LatticePoint, LatticePoint) {
        let xs = self.vertices.iter().map(|v| v.0);
        let ys = self.vertices.iter().map(|v| v.1);
        (
            (xs.clone().min().unwrap(), ys.clone().min().unwrap()),
            (xs.max().unwrap(), ys.max().unwrap()),
        )
    }

    pub fn locate(&self, p: LatticePoint) -> Location {
        let mut on_edge = false;
        for e in &self.edges {
            let c = cross(e.from, e.to, p);
            if c < 0 {
                return Location::Exterior;
            }
            if c == 0 {
                on_edge = true;
            }
        }
        if on_edge {
            Location::Boundary
        } else {
            Location::Interior
        }
    }

    /// All lattice points of the closed polygon, row by row.
    pub fn lattice_points(&self) -> Vec<LatticePoint> {
        let ((x0, y0), (x1, y1)) = self.bounding_box();
        (y0..=y1)
            .flat_map(|y| (x0..=x1).map(move |x| (x, y)))
            .filter(|&p| self.locate(p) != Location::Exterior)
            .collect()
    }

    /// Interior angles in radians, one per vertex.
    pub fn interior_angles<T: Real>(&self) -> Vec<T> {
        let n = self.edges.len();
        (0..n)
            .map(|k| T::PI() - exterior_angle::<T>(&self.edges[(k + n - 1) % n], &self.edges[k]))
            .collect()
    }

    pub fn exterior_angle_sum<T: Real>(&self) -> T {
        let n = self.edges.len();
        (0..n).fold(T::zero(), |acc, k| {
            acc + exterior_angle::<T>(&self.edges[(k + n - 1) % n], &self.edges[k])
        })
    }

    pub fn report(&self) -> LatticeReport {
        LatticeReport {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeReport {
                    normal: e.normal,
                    d: e.d,
                })
                .collect(),
            vol: RationalReport {
                num: *self.vol.numer(),
                den: *self.vol.denom(),
            },
            g: self.g,
            s: self.s,
            pick_ok: self.pick_ok(),
        }
    }
}

fn exterior_angle<T: Real>(prev: &Edge, next: &Edge) -> T {
    let a = T::from_i64(prev.direction.0).unwrap();
    let b = T::from_i64(prev.direction.1).unwrap();
    let c = T::from_i64(next.direction.0).unwrap();
    let d = T::from_i64(next.direction.1).unwrap();
    (a * d - b * c).atan2(a * c + b * d)
}

pub fn newton_polygon<T: Real>(p: &LaurentPoly<T>) -> Result<NewtonPolygon> {
    NewtonPolygon::from_points(&p.support())
}

/// `(g, s)` by classifying every point of the integer bounding box.
pub fn lattice_counts(poly: &NewtonPolygon) -> (u64, u64) {
    let ((x0, y0), (x1, y1)) = poly.bounding_box();
    let mut g = 0;
    let mut s = 0;
    for y in y0..=y1 {
        for x in x0..=x1 {
            match poly.locate((x, y)) {
                Location::Interior => g += 1,
                Location::Boundary => s += 1,
                Location::Exterior => {}
            }
        }
    }
    (g, s)
}

/// `2 pi vol`, the universal bound for the total curvature of the traced arcs.
pub fn curvature_bound<T: Real>(poly: &NewtonPolygon) -> T {
    T::lit(2.0) * T::PI() * poly.vol_as::<T>()
}

/// A point of the open polygon produced by the moment map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentImage<T> {
    pub point: (T, T),
}

/// Algebraic moment map weighted by every lattice point of the polygon.
pub fn moment_map<T: Real>(poly: &NewtonPolygon, x: T, y: T) -> Result<MomentImage<T>> {
    if x == T::zero() || y == T::zero() || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!(
            "moment map at ({}, {})",
            x.to_f64_lossy(),
            y.to_f64_lossy()
        )));
    }
    let (lu, lv) = (x.abs().ln(), y.abs().ln());
    let pts = poly.lattice_points();
    let logs: Vec<T> = pts
        .iter()
        .map(|&(a, b)| T::from_i64(a).unwrap() * lu + T::from_i64(b).unwrap() * lv)
        .collect();
    let m = logs.iter().copied().fold(T::neg_infinity(), T::max);
    let (mut sw, mut sx, mut sy) = (T::zero(), T::zero(), T::zero());
    for (&(a, b), &l) in pts.iter().zip(&logs) {
        let w = (l - m).exp();
        sw = sw + w;
        sx = sx + w * T::from_i64(a).unwrap();
        sy = sy + w * T::from_i64(b).unwrap();
    }
    Ok(MomentImage {
        point: (sx / sw, sy / sw),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub normal: LatticePoint,
    pub d: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalReport {
    pub num: i64,
    pub den: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeReport {
    pub vertices: Vec<LatticePoint>,
    pub edges: Vec<EdgeReport>,
    pub vol: RationalReport,
    pub g: u64,
    pub s: u64,
    pub pick_ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(text: &str) -> NewtonPolygon {
        newton_polygon(&text.parse::<LaurentPoly<f64>>().unwrap()).unwrap()
    }

    #[test]
    fn unit_triangle() {
        let p = poly("1 + x + y");
        assert_eq!(p.vertices(), &[(0, 0), (1, 0), (0, 1)]);
        assert_eq!(p.vol(), Ratio::new(1, 2));
        assert_eq!((p.g(), p.s()), (0, 3));
        assert_eq!(lattice_counts(&p), (0, 3));
        assert!((curvature_bound::<f64>(&p) - PI).abs() < 1e-15);
        assert_eq!(
            p.edges().iter().map(|e| e.normal).collect::<Vec<_>>(),
            vec![(0, -1), (1, 1), (-1, 0)]
        );
    }

    #[test]
    fn doubled_triangle() {
        let p = poly("x^2 + y^2 + 1");
        assert_eq!(p.vol(), Ratio::from_integer(2));
        assert_eq!((p.g(), p.s()), (0, 6));
        assert!(p.pick_ok());
        assert!(p.edges().iter().all(|e| e.d == 2));
        assert!((curvature_bound::<f64>(&p) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn dense_cubic() {
        // the brute-force enumeration over the 4x4 box gives 1 interior and
        // 9 boundary points
        let p = NewtonPolygon::from_points(&[
            (0, 0),
            (1, 0),
            (2, 0),
            (3, 0),
            (0, 1),
            (1, 1),
            (2, 1),
            (0, 2),
            (1, 2),
            (0, 3),
        ])
        .unwrap();
        assert_eq!(p.vol(), Ratio::new(9, 2));
        assert_eq!((p.g(), p.s()), (1, 9));
        assert!((curvature_bound::<f64>(&p) - 9.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn square_counts() {
        let p = NewtonPolygon::from_points(&[(0, 0), (2, 0), (2, 2), (0, 2), (1, 1)]).unwrap();
        assert_eq!(lattice_counts(&p), (1, 8));
        assert_eq!(p.vol(), Ratio::from_integer(4));
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn degenerate_support_rejected() {
        assert_eq!(
            NewtonPolygon::from_points(&[(0, 0), (1, 1), (3, 3)]),
            Err(Error::DegenerateSupport)
        );
        assert_eq!(NewtonPolygon::from_points(&[]), Err(Error::EmptySupport));
    }

    #[test]
    fn moment_map_examples() {
        let t = poly("1 + x + y");
        let m = moment_map(&t, -1.0f64, -1.0).unwrap();
        assert!((m.point.0 - 1.0 / 3.0).abs() < 1e-15 && (m.point.1 - 1.0 / 3.0).abs() < 1e-15);
        let m = moment_map(&t, 1e8f64, 1.0).unwrap();
        assert!((m.point.0 - 1.0).abs() < 1e-7 && m.point.1.abs() < 1e-7);
        let m = moment_map(&t, 1e300f64, 1.0).unwrap();
        assert!(m.point.0.is_finite());
        // six lattice points (0,0),(1,0),(2,0),(0,1),(1,1),(0,2), equal weights:
        // x-mean = (0+1+2+0+1+0)/6 = 2/3
        let m = moment_map(&poly("x^2 + y^2 + 1"), 1.0f64, 1.0).unwrap();
        assert!((m.point.0 - 2.0 / 3.0).abs() < 1e-15 && (m.point.1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(moment_map(&t, 0.0f64, 1.0).is_err());
    }

    #[test]
    fn angle_budgets() {
        let p = poly("1 + x + y + x^2*y + x*y^3");
        assert!((p.exterior_angle_sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        let n = p.vertices().len() as f64;
        let interior: f64 = p.interior_angles::<f64>().iter().sum();
        assert!((interior - (n - 2.0) * PI).abs() < 1e-12);
    }

    #[test]
    fn report_shape() {
        let r = poly("1 + x + y").report();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["vol"]["num"], 1);
        assert_eq!(v["vol"]["den"], 2);
        assert_eq!(v["pick_ok"], true);
        assert_eq!(v["edges"][0]["d"], 1);
    }
}
