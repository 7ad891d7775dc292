//! Real amoebas of plane curves: Newton polygons, branch tracing in logarithmic
//! coordinates, the logarithmic Gauss map, total curvature, Harnack
//! classification and amoeba rasters.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`);
//! lattice quantities are exact integers and rationals.

// `!(a > b)` is used on purpose where NaN must fail a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod curvature;
pub mod error;
pub mod gauss;
pub mod lattice;
pub mod laurent;
pub mod raster;
pub mod roots;
pub mod scalar;
pub mod tentacle;
pub mod tracer;

pub use classify::{classify, classify_full, ClassifyConfig, HarnackVerdict, Verdict};
pub use error::{Error, Result};
pub use lattice::{newton_polygon, NewtonPolygon};
pub use laurent::LaurentPoly;
pub use scalar::Real;

pub type LaurentPoly64 = laurent::LaurentPoly<f64>;
pub type LaurentPoly32 = laurent::LaurentPoly<f32>;
pub type ArcSet64 = tracer::ArcSet<f64>;
pub type ArcSet32 = tracer::ArcSet<f32>;
pub type CurvatureReport64 = curvature::CurvatureReport<f64>;
pub type ScanReport64 = gauss::ScanReport<f64>;
pub type AmoebaRaster64 = raster::AmoebaRaster<f64>;
pub type Classification64 = classify::Classification<f64>;
