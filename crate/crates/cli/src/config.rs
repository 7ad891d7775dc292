//! Run configuration: command-line flags layered over an optional TOML file
//! layered over built-in defaults.

use std::path::{Path, PathBuf};

use amoeba_core::classify::ClassifyConfig;
use amoeba_core::gauss::FiberTolerances;
use amoeba_core::tracer::TraceConfig;
use amoeba_core::LaurentPoly64;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const THREADS_ENV: &str = "AMOEBA_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Polynomial: text like "1+x+y", inline JSON, or @path to either.
    #[arg(short, long)]
    pub poly: Option<String>,
    /// Output file, or output directory for `classify`.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Half width W of the log window [-W, W]^2.
    #[arg(long)]
    pub window: Option<f64>,
    /// Half width of the raster window; defaults to half of `--window`.
    #[arg(long)]
    pub raster_window: Option<f64>,
    /// Seed grid lines per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Directions sampled on RP^1 for the fiber scan.
    #[arg(long)]
    pub theta_samples: Option<usize>,
    /// Raster cells per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Argument samples per raster slice.
    #[arg(long)]
    pub nphi: Option<usize>,
    /// Seed for the sample jitter.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to AMOEBA_LAB_THREADS, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output format; not every subcommand supports all three.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub tol: Tolerances,
}

/// Tolerance overrides. Each one is also accepted under `[tolerances]` in the
/// config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Maximal Gauss-angle change per tracing step.
    #[arg(long)]
    pub tol_theta_max: Option<f64>,
    /// Newton corrector tolerance in log coordinates.
    #[arg(long)]
    pub tol_corrector: Option<f64>,
    /// Relative residual every traced point must satisfy.
    #[arg(long)]
    pub tol_residual: Option<f64>,
    /// Normalized gradient norm below which a traced point counts as singular.
    #[arg(long)]
    pub tol_singular: Option<f64>,
    /// Distance under which a new seed lies on a traced arc.
    #[arg(long)]
    pub tol_merge: Option<f64>,
    /// Largest |cos| between polyline tangent and Gauss direction.
    #[arg(long)]
    pub tol_tangent: Option<f64>,
    /// Intercept gap allowed when gluing an end to an edge root.
    #[arg(long)]
    pub tol_glue: Option<f64>,
    /// Relative residual a fiber solution must satisfy.
    #[arg(long)]
    pub tol_fiber_residual: Option<f64>,
    /// Relative imaginary part still counted as real.
    #[arg(long)]
    pub tol_fiber_real: Option<f64>,
    /// Relative distance under which fiber solutions are merged.
    #[arg(long)]
    pub tol_fiber_cluster: Option<f64>,
    /// Relative gap to 2 pi vol still counted as maximal curvature.
    #[arg(long)]
    pub tol_curvature: Option<f64>,
}

impl Tolerances {
    fn or(self, lower: Tolerances) -> Tolerances {
        Tolerances {
            tol_theta_max: self.tol_theta_max.or(lower.tol_theta_max),
            tol_corrector: self.tol_corrector.or(lower.tol_corrector),
            tol_residual: self.tol_residual.or(lower.tol_residual),
            tol_singular: self.tol_singular.or(lower.tol_singular),
            tol_merge: self.tol_merge.or(lower.tol_merge),
            tol_tangent: self.tol_tangent.or(lower.tol_tangent),
            tol_glue: self.tol_glue.or(lower.tol_glue),
            tol_fiber_residual: self.tol_fiber_residual.or(lower.tol_fiber_residual),
            tol_fiber_real: self.tol_fiber_real.or(lower.tol_fiber_real),
            tol_fiber_cluster: self.tol_fiber_cluster.or(lower.tol_fiber_cluster),
            tol_curvature: self.tol_curvature.or(lower.tol_curvature),
        }
    }

    fn values(&self) -> [(&'static str, Option<f64>); 11] {
        [
            ("theta_max", self.tol_theta_max),
            ("corrector", self.tol_corrector),
            ("residual", self.tol_residual),
            ("singular", self.tol_singular),
            ("merge", self.tol_merge),
            ("tangent", self.tol_tangent),
            ("glue", self.tol_glue),
            ("fiber_residual", self.tol_fiber_residual),
            ("fiber_real", self.tol_fiber_real),
            ("fiber_cluster", self.tol_fiber_cluster),
            ("curvature", self.tol_curvature),
        ]
    }
}

/// Contents of a `--config` file. Keys mirror the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    poly: Option<String>,
    out: Option<PathBuf>,
    window: Option<f64>,
    raster_window: Option<f64>,
    grid: Option<usize>,
    theta_samples: Option<usize>,
    resolution: Option<usize>,
    nphi: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    format: Option<Format>,
    #[serde(default)]
    tolerances: Tolerances,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub polynomial: String,
    pub window: f64,
    pub raster_window: f64,
    pub grid_n: usize,
    pub theta_samples: usize,
    pub resolution: usize,
    pub n_phi: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, default_format: Format) -> Result<RunConfig, Failure> {
        let file = match &args.config {
            Some(path) => {
                let text = read_text(path)?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let env_threads = match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => None,
        };
        let polynomial = args
            .poly
            .clone()
            .or(file.poly)
            .ok_or_else(|| Failure::usage("no polynomial given (use -p/--poly)"))?;
        let window = args.window.or(file.window).unwrap_or(12.0);
        let cfg = RunConfig {
            polynomial,
            window,
            raster_window: args.raster_window.or(file.raster_window).unwrap_or(window / 2.0),
            grid_n: args.grid.or(file.grid).unwrap_or(32),
            theta_samples: args.theta_samples.or(file.theta_samples).unwrap_or(64),
            resolution: args.resolution.or(file.resolution).unwrap_or(256),
            n_phi: args.nphi.or(file.nphi).unwrap_or(64),
            seed: args.seed.or(file.seed).unwrap_or(0),
            tolerances: args.tol.clone().or(file.tolerances),
            output: args.out.clone().or(file.out),
            format: args.format.or(file.format).unwrap_or(default_format),
            threads: args.threads.or(env_threads).or(file.threads),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        for (name, w) in [("window", self.window), ("raster-window", self.raster_window)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Failure::usage(format!("{name} must be positive, got {w}")));
            }
        }
        for (name, v) in [
            ("grid", self.grid_n),
            ("theta-samples", self.theta_samples),
            ("resolution", self.resolution),
            ("nphi", self.n_phi),
        ] {
            if v == 0 {
                return Err(Failure::usage(format!("{name} must be positive")));
            }
        }
        if self.threads == Some(0) {
            return Err(Failure::usage("threads must be positive"));
        }
        for (name, v) in self.tolerances.values() {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Failure::usage(format!("tolerance {name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Parses the polynomial argument: `@path` reads a file, text starting
    /// with `{` is the JSON form, anything else the expression grammar.
    pub fn parse_polynomial(&self) -> Result<LaurentPoly64, Failure> {
        let text = match self.polynomial.strip_prefix('@') {
            Some(path) => read_text(Path::new(path))?,
            None => self.polynomial.clone(),
        };
        let text = text.trim();
        let parsed = if text.starts_with('{') {
            LaurentPoly64::from_json_str(text)
        } else {
            text.parse::<LaurentPoly64>()
        };
        parsed.map_err(Failure::from)
    }

    pub fn trace_config(&self) -> TraceConfig {
        let t = &self.tolerances;
        let mut c = TraceConfig {
            window: self.window,
            grid_n: self.grid_n,
            ..TraceConfig::default()
        };
        if let Some(v) = t.tol_theta_max {
            c.theta_max = v;
        }
        if let Some(v) = t.tol_corrector {
            c.corrector_tol = v;
        }
        if let Some(v) = t.tol_residual {
            c.residual_tol = v;
        }
        if let Some(v) = t.tol_singular {
            c.singular_tol = v;
        }
        if let Some(v) = t.tol_merge {
            c.merge_tol = v;
        }
        if let Some(v) = t.tol_tangent {
            c.tangent_tol = v;
        }
        if let Some(v) = t.tol_glue {
            c.tentacle.glue = v;
        }
        c
    }

    pub fn fiber_tolerances(&self) -> FiberTolerances {
        let t = &self.tolerances;
        let mut f = FiberTolerances::default();
        if let Some(v) = t.tol_fiber_residual {
            f.residual = v;
        }
        if let Some(v) = t.tol_fiber_real {
            f.real = v;
        }
        if let Some(v) = t.tol_fiber_cluster {
            f.cluster = v;
        }
        f
    }

    pub fn classify_config(&self) -> ClassifyConfig {
        let mut c = ClassifyConfig {
            trace: self.trace_config(),
            theta_samples: self.theta_samples,
            seed: self.seed,
            fiber: self.fiber_tolerances(),
            ..ClassifyConfig::default()
        };
        if let Some(v) = self.tolerances.tol_curvature {
            c.curvature_tol = v;
        }
        c
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}
