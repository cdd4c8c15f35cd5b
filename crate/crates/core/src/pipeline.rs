//! The two-stage denoising loop: filter face normals, then move vertices to match them.

use alloc::vec::Vec;

use crate::envt::{compute_neighborhoods, filter_all, FilterParams, ParamError, PassStats};
use crate::exec::Executor;
use crate::mesh::TriMesh;
use crate::metrics::{msae, vertex_error_ev, TracePoint};
use crate::neighborhood::NeighborhoodScheme;
use crate::vertex::{synchronize_vertices, VertexError, VertexUpdateParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseParams {
    pub filter: FilterParams,
    /// Outer iterations `p`.
    pub iterations: usize,
    pub vertex: VertexUpdateParams,
}

impl DenoiseParams {
    /// `tau`, `radius` (geometric scheme) and `p`, with defaults for everything else.
    pub fn new(tau: f64, radius: f64, iterations: usize) -> Self {
        DenoiseParams {
            filter: FilterParams::new(tau, NeighborhoodScheme::Geometric { radius }),
            iterations,
            vertex: VertexUpdateParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.filter.validate()?;
        self.vertex.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Vertex(#[from] VertexError),
    #[error("vertex positions became non-finite at iteration {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Neighborhood,
    Envt,
    VertexUpdate,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Neighborhood, Phase::Envt, Phase::VertexUpdate];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Neighborhood => "neighborhood",
            Phase::Envt => "envt",
            Phase::VertexUpdate => "vertex_update",
        }
    }
}

/// Hooks called by [`denoise_pipeline`]. Observers only read; they cannot
/// influence the computation.
pub trait Observer {
    fn phase_started(&mut self, _phase: Phase) {}
    fn phase_finished(&mut self, _phase: Phase) {}
    /// Called after outer iteration `iteration` (1-based) with the updated mesh.
    fn iteration_finished(&mut self, _iteration: usize, _mesh: &TriMesh, _stats: &PassStats) {}
}

impl Observer for () {}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn phase_started(&mut self, phase: Phase) {
        (**self).phase_started(phase);
    }
    fn phase_finished(&mut self, phase: Phase) {
        (**self).phase_finished(phase);
    }
    fn iteration_finished(&mut self, iteration: usize, mesh: &TriMesh, stats: &PassStats) {
        (**self).iteration_finished(iteration, mesh, stats);
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn phase_started(&mut self, phase: Phase) {
        self.0.phase_started(phase);
        self.1.phase_started(phase);
    }
    fn phase_finished(&mut self, phase: Phase) {
        self.0.phase_finished(phase);
        self.1.phase_finished(phase);
    }
    fn iteration_finished(&mut self, iteration: usize, mesh: &TriMesh, stats: &PassStats) {
        self.0.iteration_finished(iteration, mesh, stats);
        self.1.iteration_finished(iteration, mesh, stats);
    }
}

/// Runs `params.iterations` rounds of normal filtering followed by vertex
/// synchronization and returns the denoised mesh. The input is not modified.
pub fn denoise_pipeline<E: Executor, O: Observer>(
    input: &TriMesh,
    params: &DenoiseParams,
    exec: &E,
    observer: &mut O,
) -> Result<TriMesh, PipelineError> {
    params.validate()?;
    let mut mesh = input.clone();
    for iteration in 1..=params.iterations {
        observer.phase_started(Phase::Neighborhood);
        let neighborhoods = compute_neighborhoods(&mesh, params.filter.scheme, exec);
        observer.phase_finished(Phase::Neighborhood);

        observer.phase_started(Phase::Envt);
        let pass = filter_all(&mesh, mesh.face_normals(), &neighborhoods, &params.filter, exec);
        observer.phase_finished(Phase::Envt);

        observer.phase_started(Phase::VertexUpdate);
        synchronize_vertices(&mut mesh, &pass.normals, params.vertex, exec)?;
        observer.phase_finished(Phase::VertexUpdate);

        if mesh.vertices().iter().any(|v| !v.is_finite()) {
            return Err(PipelineError::NonFinite(iteration));
        }
        observer.iteration_finished(iteration, &mesh, &pass.stats);
    }
    Ok(mesh)
}

/// Records MSAE (and optionally `E_v`) against a reference after every iteration.
pub struct ConvergenceTrace<'a, E: Executor> {
    reference: &'a TriMesh,
    exec: &'a E,
    with_vertex_error: bool,
    orientation_agnostic: bool,
    pub points: Vec<TracePoint>,
}

impl<'a, E: Executor> ConvergenceTrace<'a, E> {
    pub fn new(reference: &'a TriMesh, exec: &'a E) -> Self {
        ConvergenceTrace {
            reference,
            exec,
            with_vertex_error: true,
            orientation_agnostic: false,
            points: Vec::new(),
        }
    }

    /// Skip the (brute-force) vertex error; `e_v` is reported as NaN.
    pub fn msae_only(mut self) -> Self {
        self.with_vertex_error = false;
        self
    }

    pub fn orientation_agnostic(mut self, yes: bool) -> Self {
        self.orientation_agnostic = yes;
        self
    }
}

impl<E: Executor> Observer for ConvergenceTrace<'_, E> {
    fn iteration_finished(&mut self, iteration: usize, mesh: &TriMesh, _stats: &PassStats) {
        let msae_degrees = msae(mesh, self.reference, self.orientation_agnostic).unwrap_or(f64::NAN);
        let e_v = if self.with_vertex_error {
            vertex_error_ev(mesh, self.reference, self.exec).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        self.points.push(TracePoint {
            iteration,
            msae_degrees,
            e_v,
        });
    }
}
