//! Element-based normal voting tensors and the face-normal filter built on them.
//!
//! For every face the tensor `C = Σ w_j A_j n_j n_jᵀ / Σ w_j` is accumulated
//! over its weighted neighborhood and eigendecomposed. The eigenvalues,
//! normalized to unit Euclidean length, are quantized against a threshold
//! `τ` into one of three feature classes, and the face normal is replaced by
//! `normalize(d·n + C̃ n)` where `C̃` keeps the eigenvectors but uses the
//! quantized `{0, 1}` eigenvalues.

use alloc::vec::Vec;

use crate::eigen::{compose, eigen_sym3, EigenError};
use crate::exec::Executor;
use crate::geom::{Mat3, Vec3};
use crate::mesh::TriMesh;
use crate::neighborhood::{binary_weights, neighbors, NeighborScratch, Neighborhood, NeighborhoodScheme, SchemeError};

pub const DEFAULT_DAMPING: f64 = 3.0;
pub const DEFAULT_RHO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EnvtError {
    #[error("face {0} has no usable (non-degenerate) neighbors")]
    Unusable(usize),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("eigenvalue threshold tau must lie in (0, 1), got {0}")]
    Tau(f64),
    #[error("damping factor must be finite and non-negative, got {0}")]
    Damping(f64),
    #[error("angle threshold rho must lie in (0, pi], got {0}")]
    Rho(f64),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// A face's voting tensor with its sorted eigensystem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envt {
    pub tensor: Mat3,
    /// Eigenvalues of `tensor`, descending.
    pub raw_eigenvalues: [f64; 3],
    /// `raw_eigenvalues` scaled to unit Euclidean norm (tiny negative round-off clamped to 0).
    pub eigenvalues: [f64; 3],
    pub eigenvectors: [Vec3; 3],
}

/// Local shape class selected by the quantized spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureClass {
    Planar,
    Edge,
    Corner,
}

impl FeatureClass {
    /// Quantized eigenvalues for this class.
    pub fn weights(self) -> [f64; 3] {
        match self {
            FeatureClass::Planar => [1.0, 0.0, 0.0],
            FeatureClass::Edge => [1.0, 1.0, 0.0],
            FeatureClass::Corner => [1.0, 1.0, 1.0],
        }
    }
}

/// Accumulates the tensor over `nb` using `normals` and the mesh's face areas.
/// Degenerate members are skipped.
pub fn build_envt(mesh: &TriMesh, normals: &[Vec3], nb: &Neighborhood) -> Result<Envt, EnvtError> {
    let areas = mesh.face_areas();
    let mut sum = Mat3::ZERO;
    let mut total_weight = 0.0;
    for &(g, w) in &nb.members {
        if mesh.is_degenerate(g) {
            continue;
        }
        sum += Mat3::outer(normals[g], normals[g]).scale(w * areas[g]);
        total_weight += w;
    }
    if total_weight <= 0.0 {
        return Err(EnvtError::Unusable(nb.center));
    }
    let tensor = sum.scale(1.0 / total_weight);
    envt_from_tensor(tensor).map_err(|e| match e {
        EnvtError::Unusable(_) => EnvtError::Unusable(nb.center),
        other => other,
    })
}

/// Eigendecomposes an already accumulated tensor.
pub fn envt_from_tensor(tensor: Mat3) -> Result<Envt, EnvtError> {
    let eig = eigen_sym3(&tensor)?;
    let raw = eig.values;
    let norm = libm::sqrt(raw.iter().map(|l| l * l).sum::<f64>());
    if !(norm > 0.0) {
        return Err(EnvtError::Unusable(usize::MAX));
    }
    let eigenvalues = raw.map(|l| (l / norm).max(0.0));
    Ok(Envt {
        tensor,
        raw_eigenvalues: raw,
        eigenvalues,
        eigenvectors: eig.vectors,
    })
}

/// Quantizes sorted, normalized eigenvalues against `tau`.
///
/// `λ₃ ≥ τ` is a corner, otherwise `λ₂ ≥ τ` is an edge, otherwise planar.
pub fn classify(eigenvalues: [f64; 3], tau: f64) -> FeatureClass {
    let [l1, l2, l3] = eigenvalues;
    if l3 >= tau {
        FeatureClass::Corner
    } else if l2 >= tau {
        FeatureClass::Edge
    } else {
        if l1 < tau {
            log::warn!("tau {tau} exceeds the dominant eigenvalue {l1}; treating as planar");
        }
        FeatureClass::Planar
    }
}

/// Binary eigenvalue optimization: the `{0, 1}` eigenvalues for `eigenvalues` at threshold `tau`.
pub fn binary_optimize(eigenvalues: [f64; 3], tau: f64) -> [f64; 3] {
    classify(eigenvalues, tau).weights()
}

/// `normalize(d·n + Σ λ̃_k ⟨e_k, n⟩ e_k)`; `None` when the sum vanishes.
pub fn filter_normal(normal: Vec3, eigenvectors: &[Vec3; 3], quantized: [f64; 3], damping: f64) -> Option<Vec3> {
    let mut v = normal * damping;
    for k in 0..3 {
        if quantized[k] != 0.0 {
            v += eigenvectors[k] * (quantized[k] * eigenvectors[k].dot(normal));
        }
    }
    v.try_normalize()
}

/// The filtering tensor `C̃ = Σ λ̃_k e_k e_kᵀ`.
pub fn quantized_tensor(envt: &Envt, quantized: [f64; 3]) -> Mat3 {
    compose(quantized, envt.eigenvectors)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub tau: f64,
    pub damping: f64,
    pub rho: f64,
    pub scheme: NeighborhoodScheme,
}

impl FilterParams {
    pub fn new(tau: f64, scheme: NeighborhoodScheme) -> Self {
        FilterParams {
            tau,
            damping: DEFAULT_DAMPING,
            rho: DEFAULT_RHO,
            scheme,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(ParamError::Tau(self.tau));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(ParamError::Damping(self.damping));
        }
        if !(self.rho > 0.0 && self.rho <= core::f64::consts::PI) {
            return Err(ParamError::Rho(self.rho));
        }
        self.scheme.validate()?;
        Ok(())
    }
}

/// Why a face kept its previous normal during a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceFlag {
    /// The face itself is degenerate.
    Degenerate,
    /// No usable neighbors (or the tensor could not be decomposed).
    Unusable,
    /// `d·n + C̃n` vanished.
    ZeroResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceOutcome {
    pub normal: Vec3,
    pub class: Option<FeatureClass>,
    pub flag: Option<FaceFlag>,
}

impl FaceOutcome {
    fn kept(normal: Vec3, flag: FaceFlag) -> Self {
        FaceOutcome {
            normal,
            class: None,
            flag: Some(flag),
        }
    }
}

/// Runs weighting, tensor construction, quantization and filtering for one face.
pub fn filter_face(
    mesh: &TriMesh,
    normals: &[Vec3],
    f: usize,
    members: &[usize],
    params: &FilterParams,
) -> FaceOutcome {
    let n = normals[f];
    if mesh.is_degenerate(f) {
        return FaceOutcome::kept(n, FaceFlag::Degenerate);
    }
    let nb = binary_weights(mesh, normals, f, members, params.rho);
    let envt = match build_envt(mesh, normals, &nb) {
        Ok(e) => e,
        Err(_) => return FaceOutcome::kept(n, FaceFlag::Unusable),
    };
    let class = classify(envt.eigenvalues, params.tau);
    match filter_normal(n, &envt.eigenvectors, class.weights(), params.damping) {
        Some(normal) => FaceOutcome {
            normal,
            class: Some(class),
            flag: None,
        },
        None => FaceOutcome {
            normal: n,
            class: Some(class),
            flag: Some(FaceFlag::ZeroResult),
        },
    }
}

/// Neighbor lists for every face under `scheme`.
pub fn compute_neighborhoods<E: Executor>(mesh: &TriMesh, scheme: NeighborhoodScheme, exec: &E) -> Vec<Vec<usize>> {
    exec.map_indexed(mesh.face_count(), NeighborScratch::new, |scratch, f| {
        if mesh.is_degenerate(f) {
            Vec::new()
        } else {
            neighbors(mesh, f, scheme, scratch)
        }
    })
}

/// Per-pass counts of feature classes and flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PassStats {
    pub planar: usize,
    pub edge: usize,
    pub corner: usize,
    pub degenerate: usize,
    pub unusable: usize,
    pub zero_result: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassOutput {
    pub normals: Vec<Vec3>,
    pub stats: PassStats,
}

/// Filters every face against the snapshot `normals` using precomputed neighborhoods.
pub fn filter_all<E: Executor>(
    mesh: &TriMesh,
    normals: &[Vec3],
    neighborhoods: &[Vec<usize>],
    params: &FilterParams,
    exec: &E,
) -> PassOutput {
    let outcomes = exec.map_indexed(mesh.face_count(), || (), |_, f| {
        filter_face(mesh, normals, f, &neighborhoods[f], params)
    });
    let mut stats = PassStats::default();
    let mut out = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o.class {
            Some(FeatureClass::Planar) => stats.planar += 1,
            Some(FeatureClass::Edge) => stats.edge += 1,
            Some(FeatureClass::Corner) => stats.corner += 1,
            None => {}
        }
        match o.flag {
            Some(FaceFlag::Degenerate) => stats.degenerate += 1,
            Some(FaceFlag::Unusable) => stats.unusable += 1,
            Some(FaceFlag::ZeroResult) => stats.zero_result += 1,
            None => {}
        }
        out.push(o.normal);
    }
    PassOutput { normals: out, stats }
}

/// One full face-normal filtering pass over `mesh` starting from `normals`.
pub fn normal_filter_pass<E: Executor>(
    mesh: &TriMesh,
    normals: &[Vec3],
    params: &FilterParams,
    exec: &E,
) -> PassOutput {
    let neighborhoods = compute_neighborhoods(mesh, params.scheme, exec);
    filter_all(mesh, normals, &neighborhoods, params, exec)
}
