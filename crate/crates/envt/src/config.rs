//! Flat `key = value` run configuration for `denoise`, with `#` comments.
//!
//! Keys mirror the command-line flags (`vertex-iters`, `radius-edges`, ...;
//! underscores are accepted too). Flags given on the command line override
//! values from the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use envt_core::envt::{DEFAULT_DAMPING, DEFAULT_RHO};
use envt_core::pipeline::PipelineError;
use envt_core::vertex::{DEFAULT_INNER_ITERATIONS, DEFAULT_STEP_SCALE};
use envt_core::{DenoiseParams, FilterParams, NeighborhoodScheme, TriMesh, VertexUpdateParams};

pub const KEYS: &[&str] = &[
    "input",
    "output",
    "reference",
    "report",
    "tau",
    "radius",
    "radius-edges",
    "rho",
    "damping",
    "iterations",
    "vertex-iters",
    "step-scale",
    "neighborhood",
    "threads",
    "log-level",
];

pub const DEFAULT_TAU: f64 = 0.3;
pub const DEFAULT_ITERATIONS: usize = 50;
/// Default neighborhood radius in average edge lengths (about two rings of faces).
pub const DEFAULT_RADIUS_EDGES: f64 = 2.0;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`; valid keys are: {}", KEYS.join(", "))]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is set more than once")]
    Duplicate { line: usize, key: &'static str },
    #[error("line {line}: invalid value `{value}` for `{key}`: {reason}")]
    Value {
        line: usize,
        key: &'static str,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<&'static str, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let normalized = k.trim().replace('_', "-");
            let key = KEYS
                .iter()
                .copied()
                .find(|&known| known == normalized)
                .ok_or_else(|| ConfigError::UnknownKey {
                    line,
                    key: k.trim().to_string(),
                })?;
            let value = v.trim().trim_matches('"').to_string();
            if entries.insert(key, (line, value)).is_some() {
                return Err(ConfigError::Duplicate { line, key });
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, value)) => value.parse().map(Some).map_err(|e: T::Err| ConfigError::Value {
                line: *line,
                key,
                value: value.clone(),
                reason: e.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeKind {
    Combinatorial,
    #[default]
    Geometric,
    Geodesic,
}

impl FromStr for SchemeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "combinatorial" => Ok(SchemeKind::Combinatorial),
            "geometric" => Ok(SchemeKind::Geometric),
            "geodesic" => Ok(SchemeKind::Geodesic),
            _ => Err("expected combinatorial, geometric or geodesic".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSpec {
    Absolute(f64),
    /// Multiple of the input mesh's average edge length.
    Edges(f64),
}

impl RadiusSpec {
    pub fn resolve(self, mesh: &TriMesh) -> f64 {
        match self {
            RadiusSpec::Absolute(r) => r,
            RadiusSpec::Edges(k) => k * mesh.average_edge_length().unwrap_or(0.0),
        }
    }
}

/// Denoise settings before defaults are applied; every field is optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub tau: Option<f64>,
    pub radius: Option<RadiusSpec>,
    pub rho: Option<f64>,
    pub damping: Option<f64>,
    pub iterations: Option<usize>,
    pub vertex_iters: Option<usize>,
    pub step_scale: Option<f64>,
    pub neighborhood: Option<SchemeKind>,
    pub threads: Option<usize>,
    pub log_level: Option<String>,
}

impl Settings {
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, ConfigError> {
        let radius = match (cfg.get::<f64>("radius")?, cfg.get::<f64>("radius-edges")?) {
            (Some(_), Some(_)) => {
                let (line, _) = cfg.entries["radius-edges"];
                return Err(ConfigError::Value {
                    line,
                    key: "radius-edges",
                    value: cfg.raw("radius-edges").unwrap_or_default().to_string(),
                    reason: "`radius` and `radius-edges` are mutually exclusive".into(),
                });
            }
            (Some(r), None) => Some(RadiusSpec::Absolute(r)),
            (None, Some(k)) => Some(RadiusSpec::Edges(k)),
            (None, None) => None,
        };
        Ok(Settings {
            input: cfg.get("input")?,
            output: cfg.get("output")?,
            reference: cfg.get("reference")?,
            report: cfg.get("report")?,
            tau: cfg.get("tau")?,
            radius,
            rho: cfg.get("rho")?,
            damping: cfg.get("damping")?,
            iterations: cfg.get("iterations")?,
            vertex_iters: cfg.get("vertex-iters")?,
            step_scale: cfg.get("step-scale")?,
            neighborhood: cfg.get("neighborhood")?,
            threads: cfg.get("threads")?,
            log_level: cfg.get("log-level")?,
        })
    }

    /// Values in `top` win over values in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        Settings {
            input: top.input.or(self.input),
            output: top.output.or(self.output),
            reference: top.reference.or(self.reference),
            report: top.report.or(self.report),
            tau: top.tau.or(self.tau),
            radius: top.radius.or(self.radius),
            rho: top.rho.or(self.rho),
            damping: top.damping.or(self.damping),
            iterations: top.iterations.or(self.iterations),
            vertex_iters: top.vertex_iters.or(self.vertex_iters),
            step_scale: top.step_scale.or(self.step_scale),
            neighborhood: top.neighborhood.or(self.neighborhood),
            threads: top.threads.or(self.threads),
            log_level: top.log_level.or(self.log_level),
        }
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<RunConfig, SettingsError> {
        let input = self.input.ok_or(SettingsError::Missing("input"))?;
        let output = self.output.ok_or(SettingsError::Missing("output"))?;
        if same_file(&input, &output) {
            return Err(SettingsError::SamePath);
        }
        let radius = self.radius.unwrap_or(RadiusSpec::Edges(DEFAULT_RADIUS_EDGES));
        let config = RunConfig {
            input,
            output,
            reference: self.reference,
            report: self.report,
            tau: self.tau.unwrap_or(DEFAULT_TAU),
            radius,
            rho: self.rho.unwrap_or(DEFAULT_RHO),
            damping: self.damping.unwrap_or(DEFAULT_DAMPING),
            iterations: self.iterations.unwrap_or(DEFAULT_ITERATIONS),
            vertex: VertexUpdateParams {
                inner_iterations: self.vertex_iters.unwrap_or(DEFAULT_INNER_ITERATIONS),
                step_scale: self.step_scale.unwrap_or(DEFAULT_STEP_SCALE),
            },
            neighborhood: self.neighborhood.unwrap_or_default(),
            threads: self.threads,
            log_level: self.log_level.unwrap_or_else(|| "info".into()),
        };
        // Validate with a stand-in radius; the real one may depend on the mesh.
        let probe = match radius {
            RadiusSpec::Absolute(r) | RadiusSpec::Edges(r) => r,
        };
        config.params_with_radius(probe).validate()?;
        if config.iterations == 0 {
            return Err(SettingsError::NoIterations);
        }
        Ok(config)
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    if a == b {
        return true;
    }
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SettingsError {
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("output path must differ from the input path")]
    SamePath,
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error(transparent)]
    Invalid(#[from] PipelineError),
}

/// Fully resolved denoise run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Ground truth; when present a convergence trace is recorded.
    pub reference: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub tau: f64,
    pub radius: RadiusSpec,
    pub rho: f64,
    pub damping: f64,
    pub iterations: usize,
    pub vertex: VertexUpdateParams,
    pub neighborhood: SchemeKind,
    pub threads: Option<usize>,
    pub log_level: String,
}

impl RunConfig {
    fn params_with_radius(&self, radius: f64) -> DenoiseParams {
        let scheme = match self.neighborhood {
            SchemeKind::Combinatorial => NeighborhoodScheme::Combinatorial,
            SchemeKind::Geometric => NeighborhoodScheme::Geometric { radius },
            SchemeKind::Geodesic => NeighborhoodScheme::Geodesic { radius },
        };
        DenoiseParams {
            filter: FilterParams {
                tau: self.tau,
                damping: self.damping,
                rho: self.rho,
                scheme,
            },
            iterations: self.iterations,
            vertex: self.vertex,
        }
    }

    /// Pipeline parameters with the radius resolved against `mesh`.
    pub fn params(&self, mesh: &TriMesh) -> DenoiseParams {
        self.params_with_radius(self.radius.resolve(mesh))
    }
}
