//! Subcommand implementations. Each returns the exit code on success paths
//! and a [`Failure`] otherwise.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use amoeba_core::classify::Classification;
use amoeba_core::curvature::{total_curvature, CurvatureReport};
use amoeba_core::gauss::{self, RP1Angle, ScanReport};
use amoeba_core::lattice::{moment_map, LatticeReport, MomentImage};
use amoeba_core::raster::{rasterize, render_svg, AmoebaRaster, Layers, LogRect, RasterSummary};
use amoeba_core::tracer::{trace_all, ArcSet, TraceSummary};
use amoeba_core::{classify_full, newton_polygon, LaurentPoly64, NewtonPolygon};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::failure::Failure;
use crate::json;

pub const REPORT_SCHEMA: &str = "amoeba-lab/report/v1";

/// Writes to `--out` when given, stdout otherwise.
fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String, Failure> {
    json::to_string(value).map_err(|e| Failure::pipeline("serialize", e))
}

fn unsupported(cmd: &str, format: Format) -> Failure {
    Failure::usage(format!("{cmd} does not support --format {format:?}").to_lowercase())
}

fn load(cfg: &RunConfig) -> Result<(LaurentPoly64, NewtonPolygon), Failure> {
    let p = cfg.parse_polynomial()?;
    let poly = newton_polygon(&p)?;
    Ok((p, poly))
}

fn raster_rect(cfg: &RunConfig) -> LogRect<f64> {
    LogRect::square(cfg.raster_window)
}

fn moment_layer(arcs: &ArcSet<f64>, poly: &NewtonPolygon) -> Vec<MomentImage<f64>> {
    arcs.arcs
        .iter()
        .flat_map(|a| a.points.iter().step_by(4))
        .filter_map(|&(x, y)| moment_map(poly, x, y).ok())
        .collect()
}

pub fn newton(cfg: &RunConfig) -> Result<i32, Failure> {
    if cfg.format != Format::Json {
        return Err(unsupported("newton", cfg.format));
    }
    let (_, poly) = load(cfg)?;
    emit(cfg, &to_json(&poly.report())?)?;
    Ok(0)
}

pub fn trace(cfg: &RunConfig) -> Result<i32, Failure> {
    let (p, poly) = load(cfg)?;
    let arcs = trace_all(&p, &cfg.trace_config()).map_err(|e| Failure::pipeline("trace", e))?;
    let text = match cfg.format {
        Format::Json => to_json(&arcs)?,
        Format::Csv => arcs.to_csv(),
        Format::Svg => {
            let moment = moment_layer(&arcs, &poly);
            render_svg(&Layers {
                polygon: Some(&poly),
                arcs: Some(&arcs),
                moment: &moment,
                ..Layers::default()
            })
            .map_err(|e| Failure::pipeline("figure", e))?
        }
    };
    emit(cfg, &text)?;
    Ok(0)
}

pub fn curvature(cfg: &RunConfig) -> Result<i32, Failure> {
    if cfg.format != Format::Json {
        return Err(unsupported("curvature", cfg.format));
    }
    let (p, poly) = load(cfg)?;
    let arcs = trace_all(&p, &cfg.trace_config()).map_err(|e| Failure::pipeline("trace", e))?;
    let crofton = gauss::totally_real_scan(&p, &poly, cfg.theta_samples, cfg.seed, &cfg.fiber_tolerances())
        .ok()
        .map(|s| gauss::crofton_from_scan(&s));
    let report = total_curvature(&arcs, &p, &poly, crofton).map_err(|e| Failure::pipeline("curvature", e))?;
    emit(cfg, &to_json(&report)?)?;
    Ok(0)
}

/// Scans `theta_samples` directions, or solves the single fiber over `theta`.
pub fn fibers(cfg: &RunConfig, theta: Option<f64>) -> Result<i32, Failure> {
    if cfg.format != Format::Json {
        return Err(unsupported("fibers", cfg.format));
    }
    let (p, poly) = load(cfg)?;
    let tol = cfg.fiber_tolerances();
    let text = match theta {
        Some(t) => {
            let r =
                gauss::count_fiber(&p, &poly, RP1Angle::new(t), &tol).map_err(|e| Failure::pipeline("fibers", e))?;
            to_json(&r)?
        }
        None => {
            let scan = gauss::totally_real_scan(&p, &poly, cfg.theta_samples, cfg.seed, &tol)
                .map_err(|e| Failure::pipeline("fibers", e))?;
            to_json(&FiberScanOutput {
                crofton_total: gauss::crofton_from_scan(&scan),
                scan,
            })?
        }
    };
    emit(cfg, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct FiberScanOutput {
    crofton_total: f64,
    scan: ScanReport<f64>,
}

pub fn raster(cfg: &RunConfig) -> Result<i32, Failure> {
    let (p, poly) = load(cfg)?;
    let r =
        rasterize(&p, &poly, raster_rect(cfg), (cfg.resolution, cfg.resolution), cfg.n_phi).map_err(Failure::from)?;
    let text = match cfg.format {
        Format::Json => to_json(&r.summary())?,
        Format::Svg => render_svg(&Layers {
            polygon: Some(&poly),
            raster: Some(&r),
            ..Layers::default()
        })
        .map_err(|e| Failure::pipeline("figure", e))?,
        Format::Csv => return Err(unsupported("raster", cfg.format)),
    };
    emit(cfg, &text)?;
    Ok(0)
}

/// Full evidence trail in `--out` (default `amoeba-out`); the verdict JSON is
/// also printed and decides the exit code.
pub fn classify(cfg: &RunConfig) -> Result<i32, Failure> {
    let p = cfg.parse_polynomial()?;
    let poly = newton_polygon(&p)?;
    let c: Classification<f64> = classify_full(&p, &cfg.classify_config()).map_err(Failure::from)?;
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("amoeba-out"));
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;

    let raster = rasterize(&p, &poly, raster_rect(cfg), (cfg.resolution, cfg.resolution), cfg.n_phi).ok();
    let verdict_json = to_json(&c.verdict)?;
    write_file(&dir.join("lattice.json"), &to_json(&c.lattice)?)?;
    let csv = c
        .arcs
        .as_ref()
        .map(|a| a.to_csv())
        .unwrap_or_else(|| "arc,quadrant,x,y,u,v\n".into());
    write_file(&dir.join("arcs.csv"), &csv)?;
    write_file(&dir.join("curvature.json"), &to_json(&c.curvature)?)?;
    write_file(&dir.join("gauss_scan.json"), &to_json(&c.scan)?)?;
    write_file(&dir.join("verdict.json"), &verdict_json)?;
    let moment = c.arcs.as_ref().map(|a| moment_layer(a, &poly)).unwrap_or_default();
    let pinches = c
        .curvature
        .as_ref()
        .map(|k| k.pinches.pinches.as_slice())
        .unwrap_or(&[]);
    let svg = render_svg(&Layers {
        polygon: Some(&poly),
        arcs: c.arcs.as_ref(),
        raster: raster.as_ref(),
        pinches,
        moment: &moment,
    })
    .map_err(|e| Failure::pipeline("figure", e))?;
    write_file(&dir.join("figure.svg"), &svg)?;

    let mut out = std::io::stdout().lock();
    out.write_all(verdict_json.as_bytes())
        .map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
    Ok(c.verdict.verdict.exit_code())
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage<R> {
    /// `ok`, `failed` or `skipped`.
    pub status: &'static str,
    pub error: Option<String>,
    pub result: Option<R>,
}

impl<R> Stage<R> {
    fn run(f: impl FnOnce() -> amoeba_core::Result<R>) -> Self {
        match f() {
            Ok(r) => Stage {
                status: "ok",
                error: None,
                result: Some(r),
            },
            Err(e) => Stage {
                status: "failed",
                error: Some(e.to_string()),
                result: None,
            },
        }
    }

    fn skipped(reason: &str) -> Self {
        Stage {
            status: "skipped",
            error: Some(reason.to_string()),
            result: None,
        }
    }

    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Stages {
    pub newton: Stage<LatticeReport>,
    pub trace: Stage<TraceSummary>,
    pub fibers: Stage<ScanReport<f64>>,
    pub curvature: Stage<CurvatureReport<f64>>,
    pub raster: Stage<RasterSummary>,
}

/// Consolidated report. Every field is always present; failed or skipped
/// stages carry `null` results.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub polynomial: String,
    pub config: RunConfig,
    /// `ok` when every stage succeeded, `partial` otherwise.
    pub status: &'static str,
    pub total_curvature: Option<f64>,
    pub curvature_bound: Option<f64>,
    pub crofton_total: Option<f64>,
    pub area_estimate: Option<f64>,
    pub area_bound: Option<f64>,
    pub stages: Stages,
}

pub fn build_report(cfg: &RunConfig, p: &LaurentPoly64) -> Report {
    let poly = newton_polygon(p);
    let newton = Stage::run(|| poly.as_ref().map(|q| q.report()).map_err(Clone::clone));
    let Ok(poly) = poly else {
        let skip = "newton polygon failed";
        return finish(
            cfg,
            p,
            Stages {
                newton,
                trace: Stage::skipped(skip),
                fibers: Stage::skipped(skip),
                curvature: Stage::skipped(skip),
                raster: Stage::skipped(skip),
            },
            None,
        );
    };
    let arcs = trace_all(p, &cfg.trace_config());
    let scan = gauss::totally_real_scan(p, &poly, cfg.theta_samples, cfg.seed, &cfg.fiber_tolerances());
    let crofton = scan.as_ref().ok().map(gauss::crofton_from_scan);
    let curvature = match &arcs {
        Ok(a) => Stage::run(|| total_curvature(a, p, &poly, crofton)),
        Err(_) => Stage::skipped("trace failed"),
    };
    let raster: amoeba_core::Result<AmoebaRaster<f64>> =
        rasterize(p, &poly, raster_rect(cfg), (cfg.resolution, cfg.resolution), cfg.n_phi);
    let stages = Stages {
        newton,
        trace: Stage::run(|| arcs.map(|a| a.summary())),
        fibers: Stage::run(|| scan),
        curvature,
        raster: Stage::run(|| raster.map(|r| r.summary())),
    };
    finish(cfg, p, stages, crofton)
}

fn finish(cfg: &RunConfig, p: &LaurentPoly64, stages: Stages, crofton: Option<f64>) -> Report {
    let all_ok =
        stages.newton.ok() && stages.trace.ok() && stages.fibers.ok() && stages.curvature.ok() && stages.raster.ok();
    let curv = stages.curvature.result.as_ref();
    let ras = stages.raster.result.as_ref();
    Report {
        schema: REPORT_SCHEMA,
        polynomial: p.to_string(),
        config: cfg.clone(),
        status: if all_ok { "ok" } else { "partial" },
        total_curvature: curv.map(|c| c.total),
        curvature_bound: curv.map(|c| c.bound),
        crofton_total: crofton,
        area_estimate: ras.map(|r| r.area_estimate),
        area_bound: ras.map(|r| r.area_bound),
        stages,
    }
}

/// Report JSON is written even when stages fail; the exit code is then 64 for
/// a degenerate polygon and 70 for any other stage failure.
pub fn report(cfg: &RunConfig) -> Result<i32, Failure> {
    if cfg.format != Format::Json {
        return Err(unsupported("report", cfg.format));
    }
    let p = cfg.parse_polynomial()?;
    let r = build_report(cfg, &p);
    emit(cfg, &to_json(&r)?)?;
    Ok(match (r.stages.newton.ok(), r.status) {
        (false, _) => crate::failure::EXIT_USAGE,
        (true, "ok") => 0,
        _ => crate::failure::EXIT_SOFTWARE,
    })
}
