//! Command-line front end. Exit codes: 0 success, 1 usage, 2 I/O or parse
//! failure, 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use envt_core::curvature::cotangent_mean_curvature_with;
use envt_core::metrics::{msae, vertex_error_ev};
use envt_core::noise::{
    add_noise, count_edge_flips, flip_shard, gaussian_flip_bound, shard_count, BoundCheck, MIN_MC_SAMPLES,
};
use envt_core::pipeline::{ConvergenceTrace, PipelineError};
use envt_core::{
    denoise_pipeline, Executor, FlipModel, FlipReport, MeshError, NeighborhoodScheme, NoiseDirection, NoiseModel,
    NoiseSpec, VertexArea,
};

use crate::config::{ConfigError, ConfigFile, RadiusSpec, SchemeKind, Settings, SettingsError};
use crate::exec::Rayon;
use crate::io::{load_mesh, save_field, save_mesh, IoError};
use crate::report::{write_json, FlipReportJson, MetricsReport, OrientationJson, ParamsReport, PhaseTimer, TraceRow};

const DENOISE_HELP: &str = "\
Parameter guidance:
  --tau          0.3-0.4 for heavy synthetic noise, 0.05-0.1 for scan-grade noise
  --iterations   40-60 is usually enough
  --radius       about two rings of faces; --radius-edges 2 is a good start
  --rho, --damping are normally left at 0.8 and 3

Settings can also come from --config FILE (key = value lines, # comments,
keys named like the long flags). Flags override the file.";

#[derive(Debug, Parser)]
#[command(name = "envt", version, about = "Feature-preserving triangle mesh denoising with element-based normal voting tensors")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log filter, e.g. warn, info, debug.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise a mesh.
    #[command(after_help = DENOISE_HELP)]
    Denoise(DenoiseArgs),
    /// Add synthetic noise to a clean mesh.
    AddNoise(AddNoiseArgs),
    /// Compare a result against a ground-truth mesh (MSAE and E_v).
    Evaluate(EvaluateArgs),
    /// Edge-flip statistics: Monte-Carlo probabilities or counts between two meshes.
    AnalyzeFlips(FlipArgs),
    /// Per-vertex absolute mean curvature, written as CSV or gray-level PLY.
    Curvature(CurvatureArgs),
    /// Report edges whose adjacent faces disagree in winding.
    CheckOrientation(OrientationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Combinatorial,
    Geometric,
    Geodesic,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// key = value file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Eigenvalue threshold in (0, 1).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Neighborhood radius in model units.
    #[arg(long, conflicts_with = "radius_edges")]
    pub radius: Option<f64>,
    /// Neighborhood radius as a multiple of the average edge length.
    #[arg(long)]
    pub radius_edges: Option<f64>,
    /// Normal-similarity angle in radians.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    /// Outer iterations (normal filtering + vertex update).
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Vertex-update steps per outer iteration.
    #[arg(long)]
    pub vertex_iters: Option<usize>,
    /// Multiplier on the 1/F vertex step.
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub neighborhood: Option<SchemeArg>,
    /// Ground truth; enables a per-iteration MSAE / E_v trace in the report.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Write a JSON report (timings, and metrics when --reference is given).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Gaussian,
    Uniform,
    Impulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Normal,
    Random,
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub model: ModelArg,
    /// Noise scale as a multiple of the average edge length.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value = "normal")]
    pub direction: DirectionArg,
    /// Fraction of displaced vertices (impulse model).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub impulse_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, visible_alias = "input")]
    pub result: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Treat opposite normals as equal (for meshes with flipped windings).
    #[arg(long)]
    pub orientation_agnostic: bool,
    /// Report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlipModelArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Args)]
pub struct FlipArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub model: FlipModelArg,
    /// Noise-to-edge-length ratio for the Monte-Carlo experiment.
    #[arg(long, required_unless_present = "input")]
    pub sigma_over_length: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noisy mesh; with --reference, counts actual flips instead of simulating.
    #[arg(long, requires = "reference", conflicts_with = "sigma_over_length")]
    pub input: Option<PathBuf>,
    /// Clean mesh matching --input.
    #[arg(long, requires = "input")]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AreaArg {
    MixedVoronoi,
    Barycentric,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `.csv` (vertex_index,value) or `.ply` (gray levels over [0, 99th percentile]).
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "mixed-voronoi")]
    pub area: AreaArg,
}

#[derive(Debug, Args)]
pub struct OrientationArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numerical(#[from] PipelineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) | CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<SettingsError> for CliError {
    fn from(e: SettingsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage_error(subcommand: &str, msg: impl std::fmt::Display) -> CliError {
    let mut cmd = Cli::command();
    cmd.build();
    let usage = cmd
        .find_subcommand_mut(subcommand)
        .map(|c| c.render_usage().to_string())
        .unwrap_or_default();
    CliError::Usage(format!("{msg}\n\n{usage}\n\nFor more information, try '--help'."))
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new()
        .parse_filters(level)
        .format_timestamp(None)
        .try_init();
}

fn executor(threads: Option<usize>) -> Result<Rayon, CliError> {
    match threads {
        None => Ok(Rayon::global()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => Rayon::with_threads(n).map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}"))),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if !matches!(cli.command, Command::Denoise(_)) {
        init_logging(cli.log_level.as_deref().unwrap_or("info"));
    }
    match cli.command {
        Command::Denoise(a) => denoise(a, cli.threads, cli.log_level),
        Command::AddNoise(a) => add_noise_cmd(a),
        Command::Evaluate(a) => evaluate(a, &executor(cli.threads)?),
        Command::AnalyzeFlips(a) => analyze_flips(a, &executor(cli.threads)?),
        Command::Curvature(a) => curvature(a),
        Command::CheckOrientation(a) => check_orientation(a),
    }
}

fn denoise(a: DenoiseArgs, threads: Option<usize>, log_level: Option<String>) -> Result<(), CliError> {
    let from_file = match &a.config {
        Some(path) => Settings::from_config(&ConfigFile::load(path)?)?,
        None => Settings::default(),
    };
    let radius = match (a.radius, a.radius_edges) {
        (Some(r), _) => Some(RadiusSpec::Absolute(r)),
        (None, Some(k)) => Some(RadiusSpec::Edges(k)),
        (None, None) => None,
    };
    let flags = Settings {
        input: a.input,
        output: a.output,
        reference: a.reference,
        report: a.report,
        tau: a.tau,
        radius,
        rho: a.rho,
        damping: a.damping,
        iterations: a.iterations,
        vertex_iters: a.vertex_iters,
        step_scale: a.step_scale,
        neighborhood: a.neighborhood.map(|s| match s {
            SchemeArg::Combinatorial => SchemeKind::Combinatorial,
            SchemeArg::Geometric => SchemeKind::Geometric,
            SchemeArg::Geodesic => SchemeKind::Geodesic,
        }),
        threads,
        log_level,
    };
    let run = match from_file.overlay(flags).resolve() {
        Ok(run) => run,
        Err(e @ SettingsError::Missing(_)) => return Err(usage_error("denoise", e)),
        Err(e) => return Err(e.into()),
    };
    init_logging(&run.log_level);
    let exec = executor(run.threads)?;

    let mesh = load_mesh(&run.input)?;
    let reference = run.reference.as_deref().map(load_mesh).transpose()?;
    if let Some(r) = &reference {
        if r.face_count() != mesh.face_count() {
            return Err(CliError::Input(
                MeshError::FaceCountMismatch(mesh.face_count(), r.face_count()).to_string(),
            ));
        }
    }
    let params = run.params(&mesh);
    params.validate()?;
    log::info!(
        "{}: {} vertices, {} faces; tau={} {} p={} threads={}",
        run.input.display(),
        mesh.vertex_count(),
        mesh.face_count(),
        run.tau,
        describe_scheme(params.filter.scheme),
        run.iterations,
        exec.threads()
    );

    let mut timer = PhaseTimer::new(run.iterations);
    let (result, trace) = match &reference {
        Some(r) => {
            let mut trace = ConvergenceTrace::new(r, &exec);
            let out = denoise_pipeline(&mesh, &params, &exec, &mut (&mut timer, &mut trace))?;
            (out, trace.points)
        }
        None => (denoise_pipeline(&mesh, &params, &exec, &mut timer)?, Vec::new()),
    };
    save_mesh(&run.output, &result)?;

    if let Some(path) = &run.report {
        let (msae_degrees, e_v) = match &reference {
            Some(r) => (
                Some(msae(&result, r, false).map_err(|e| CliError::Input(e.to_string()))?),
                Some(vertex_error_ev(&result, r, &exec).map_err(|e| CliError::Input(e.to_string()))?),
            ),
            None => (None, None),
        };
        let report = MetricsReport {
            msae_degrees,
            e_v,
            trace: trace.into_iter().map(TraceRow::from).collect(),
            timings_seconds: timer.timings_seconds(),
            parameters: Some(ParamsReport {
                tau: run.tau,
                radius: match params.filter.scheme {
                    NeighborhoodScheme::Combinatorial => None,
                    NeighborhoodScheme::Geometric { radius } | NeighborhoodScheme::Geodesic { radius } => Some(radius),
                },
                rho: run.rho,
                damping: run.damping,
                iterations: run.iterations,
                vertex_iters: run.vertex.inner_iterations,
                step_scale: run.vertex.step_scale,
                neighborhood: params.filter.scheme.name(),
            }),
            last_pass: timer.last_pass.map(Into::into),
        };
        write_json(Some(path), &report)?;
    }
    Ok(())
}

fn describe_scheme(s: NeighborhoodScheme) -> String {
    match s {
        NeighborhoodScheme::Combinatorial => "combinatorial".into(),
        NeighborhoodScheme::Geometric { radius } => format!("geometric r={radius}"),
        NeighborhoodScheme::Geodesic { radius } => format!("geodesic r={radius}"),
    }
}

fn add_noise_cmd(a: AddNoiseArgs) -> Result<(), CliError> {
    let spec = NoiseSpec {
        model: match a.model {
            ModelArg::Gaussian => NoiseModel::Gaussian,
            ModelArg::Uniform => NoiseModel::Uniform,
            ModelArg::Impulse => NoiseModel::Impulse,
        },
        sigma_ratio: a.sigma,
        direction: match a.direction {
            DirectionArg::Normal => NoiseDirection::Normal,
            DirectionArg::Random => NoiseDirection::Random,
        },
        impulse_fraction: a.impulse_fraction,
        seed: a.seed,
    };
    spec.validate().map_err(|e| usage_error("add-noise", e))?;
    if same_path(&a.input, &a.output) {
        return Err(CliError::Usage("output path must differ from the input path".into()));
    }
    let mesh = load_mesh(&a.input)?;
    let (noisy, _) = add_noise(&mesh, &spec).map_err(|e| CliError::Input(e.to_string()))?;
    save_mesh(&a.output, &noisy)?;
    log::info!(
        "wrote {} ({} vertices, sigma = {} x average edge length)",
        a.output.display(),
        noisy.vertex_count(),
        a.sigma
    );
    Ok(())
}

fn same_path(a: &Path, b: &Path) -> bool {
    a == b || matches!((a.canonicalize(), b.canonicalize()), (Ok(x), Ok(y)) if x == y)
}

fn evaluate<E: Executor>(a: EvaluateArgs, exec: &E) -> Result<(), CliError> {
    let result = load_mesh(&a.result)?;
    let reference = load_mesh(&a.reference)?;
    if result.face_count() != reference.face_count() {
        return Err(CliError::Input(format!(
            "{} has {} faces but {} has {}; meshes must correspond face by face",
            a.result.display(),
            result.face_count(),
            a.reference.display(),
            reference.face_count()
        )));
    }
    let t = Instant::now();
    let m = msae(&result, &reference, a.orientation_agnostic).map_err(|e| CliError::Input(e.to_string()))?;
    let t_msae = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let e_v = vertex_error_ev(&result, &reference, exec).map_err(|e| CliError::Input(e.to_string()))?;
    let t_ev = t.elapsed().as_secs_f64();
    let report = MetricsReport {
        msae_degrees: Some(m),
        e_v: Some(e_v),
        timings_seconds: [("msae".to_string(), t_msae), ("e_v".to_string(), t_ev)].into(),
        ..Default::default()
    };
    write_json(a.out.as_deref(), &report)?;
    Ok(())
}

/// Monte-Carlo flip count with shards spread over `exec`; identical for any thread count.
pub fn monte_carlo_flips<E: Executor>(sigma_over_length: f64, model: FlipModel, samples: u64, seed: u64, exec: &E) -> u64 {
    let shards = shard_count(samples) as usize;
    exec.map_indexed(shards, || (), |_, s| flip_shard(sigma_over_length, model, samples, seed, s as u64))
        .into_iter()
        .sum()
}

fn analyze_flips<E: Executor>(a: FlipArgs, exec: &E) -> Result<(), CliError> {
    let report = if let (Some(noisy), Some(clean)) = (&a.input, &a.reference) {
        let noisy = load_mesh(noisy)?;
        let clean = load_mesh(clean)?;
        let r = count_edge_flips(&clean, &noisy).map_err(|e| CliError::Input(e.to_string()))?;
        FlipReportJson::new("meshes", None, &r)
    } else {
        let x = a.sigma_over_length.expect("clap requires one of the modes");
        if !(x >= 0.0 && x.is_finite()) {
            return Err(usage_error("analyze-flips", "--sigma-over-length must be finite and non-negative"));
        }
        if a.samples < MIN_MC_SAMPLES {
            return Err(usage_error("analyze-flips", format!("--samples must be at least {MIN_MC_SAMPLES}")));
        }
        let (model, name) = match a.model {
            FlipModelArg::Gaussian => (FlipModel::Gaussian, "gaussian"),
            FlipModelArg::Uniform => (FlipModel::Uniform, "uniform"),
        };
        let flipped = monte_carlo_flips(x, model, a.samples, a.seed, exec);
        let fraction = flipped as f64 / a.samples as f64;
        let bound = match model {
            FlipModel::Gaussian => gaussian_flip_bound(x),
            // Support half-width below half the edge length: no flip is possible.
            FlipModel::Uniform => (x < 0.5).then_some(0.0),
        };
        let r = FlipReport {
            total_edges: a.samples as usize,
            flipped: flipped as usize,
            flip_fraction: fraction,
            bound_checked: bound.map(|b| BoundCheck {
                sigma_over_length: x,
                bound: b,
                passed: fraction <= b,
            }),
        };
        FlipReportJson::new("monte_carlo", Some(name), &r)
    };
    write_json(a.out.as_deref(), &report)?;
    Ok(())
}

fn curvature(a: CurvatureArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&a.input)?;
    let area = match a.area {
        AreaArg::MixedVoronoi => VertexArea::MixedVoronoi,
        AreaArg::Barycentric => VertexArea::Barycentric,
    };
    let field = cotangent_mean_curvature_with(&mesh, area);
    save_field(&a.output, &mesh, &field)?;
    let values = &field.field.values;
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    log::info!(
        "|H|: mean {mean:.6}, 99th percentile {:.6}, max {:.6}",
        field.field.percentile(99.0),
        field.field.percentile(100.0)
    );
    Ok(())
}

fn check_orientation(a: OrientationArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&a.input)?;
    let report = OrientationJson::from(mesh.check_orientation());
    if !report.consistent {
        log::warn!(
            "{}: {} edges are traversed in the same direction by both adjacent faces",
            a.input.display(),
            report.inconsistent_edges
        );
    }
    write_json(a.out.as_deref(), &report)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use envt_core::Serial;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_carries_parameter_guidance() {
        let mut cmd = Cli::command();
        let help = cmd.find_subcommand_mut("denoise").unwrap().render_long_help().to_string();
        assert!(help.contains("0.3-0.4") && help.contains("0.05-0.1") && help.contains("40-60"));
    }

    #[test]
    fn parallel_flip_count_matches_serial() {
        let exec = Rayon::with_threads(3).unwrap();
        let a = monte_carlo_flips(0.4, FlipModel::Gaussian, 200_000, 11, &exec);
        let b = monte_carlo_flips(0.4, FlipModel::Gaussian, 200_000, 11, &Serial);
        assert_eq!(a, b);
        let p = envt_core::noise::flip_probability_mc(0.4, FlipModel::Gaussian, 200_000, 11).unwrap();
        assert_eq!(a as f64 / 200_000.0, p);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        assert_eq!(CliError::Input(String::new()).exit_code(), 2);
        assert_eq!(CliError::Numerical(PipelineError::NonFinite(1)).exit_code(), 3);
    }
}
