//! Synthetic noise, edge-flip counting and Monte-Carlo flip probabilities.
//!
//! Noise magnitudes are expressed relative to the mesh's average edge length
//! `l_e`. A flip is an edge whose noisy direction has a negative dot product
//! with its clean direction.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geom::Vec3;
use crate::mesh::{MeshError, TriMesh};

/// Monte-Carlo samples per independent RNG stream.
pub const MC_SHARD_SIZE: u64 = 1 << 16;
pub const MIN_MC_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseModel {
    Gaussian,
    Uniform,
    /// Gaussian displacement applied to a random subset of vertices.
    Impulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseDirection {
    /// Along the area-weighted vertex normal of the clean mesh.
    Normal,
    /// Independently along each coordinate axis.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// Noise scale as a multiple of the average edge length.
    pub sigma_ratio: f64,
    pub direction: NoiseDirection,
    /// Fraction of vertices displaced (impulse model only).
    pub impulse_fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma_ratio: f64, direction: NoiseDirection, seed: u64) -> Self {
        NoiseSpec {
            model: NoiseModel::Gaussian,
            sigma_ratio,
            direction,
            impulse_fraction: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.sigma_ratio >= 0.0 && self.sigma_ratio.is_finite()) {
            return Err(NoiseError::Sigma(self.sigma_ratio));
        }
        if self.model == NoiseModel::Impulse && !(self.impulse_fraction > 0.0 && self.impulse_fraction <= 1.0) {
            return Err(NoiseError::Fraction(self.impulse_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("noise ratio must be finite and non-negative, got {0}")]
    Sigma(f64),
    #[error("fraction must lie in the allowed range, got {0}")]
    Fraction(f64),
    #[error("at least {MIN_MC_SAMPLES} Monte-Carlo samples are required, got {0}")]
    TooFewSamples(u64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Returns `(noisy, ground_truth)`; connectivity is unchanged.
pub fn add_noise(mesh: &TriMesh, spec: &NoiseSpec) -> Result<(TriMesh, TriMesh), NoiseError> {
    spec.validate()?;
    let scale = spec.sigma_ratio * mesh.average_edge_length().unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = mesh.vertex_count();

    let selected: Vec<bool> = match spec.model {
        NoiseModel::Impulse => {
            let k = libm::round(spec.impulse_fraction * n as f64) as usize;
            let mut mask = alloc::vec![false; n];
            for i in index::sample(&mut rng, n, k.min(n)).into_vec() {
                mask[i] = true;
            }
            mask
        }
        _ => alloc::vec![true; n],
    };
    let vertex_normals = match spec.direction {
        NoiseDirection::Normal => mesh.vertex_normals(),
        NoiseDirection::Random => Vec::new(),
    };
    let uniform = spec.model == NoiseModel::Uniform;
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        if uniform {
            rng.random_range(-1.0..=1.0)
        } else {
            rng.sample(StandardNormal)
        }
    };

    let mut positions = mesh.vertices().to_vec();
    for (i, p) in positions.iter_mut().enumerate() {
        if !selected[i] {
            continue;
        }
        let offset = match spec.direction {
            NoiseDirection::Random => Vec3::new(draw(&mut rng), draw(&mut rng), draw(&mut rng)),
            NoiseDirection::Normal => vertex_normals[i] * draw(&mut rng),
        };
        *p += offset * scale;
    }
    let mut noisy = mesh.clone();
    noisy.set_vertices(positions);
    Ok((noisy, mesh.clone()))
}

/// Published upper bound on the Gaussian flip probability: 0.046 for ratios up to 0.25, 0.318 up to 0.5.
#[allow(clippy::approx_constant)] // 0.318 is the bound itself, not 1/π
pub fn gaussian_flip_bound(sigma_over_length: f64) -> Option<f64> {
    if sigma_over_length <= 0.25 {
        Some(0.046)
    } else if sigma_over_length <= 0.5 {
        Some(0.318)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub sigma_over_length: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipReport {
    pub total_edges: usize,
    pub flipped: usize,
    pub flip_fraction: f64,
    pub bound_checked: Option<BoundCheck>,
}

/// Counts edges whose direction reversed between `clean` and `noisy`.
pub fn count_edge_flips(clean: &TriMesh, noisy: &TriMesh) -> Result<FlipReport, NoiseError> {
    if !clean.same_connectivity(noisy) {
        return Err(MeshError::ConnectivityMismatch.into());
    }
    let edges = clean.unique_edges();
    let (c, n) = (clean.vertices(), noisy.vertices());
    let flipped = edges
        .iter()
        .filter(|e| (c[e.b] - c[e.a]).dot(n[e.b] - n[e.a]) < 0.0)
        .count();
    Ok(FlipReport {
        total_edges: edges.len(),
        flipped,
        flip_fraction: if edges.is_empty() {
            0.0
        } else {
            flipped as f64 / edges.len() as f64
        },
        bound_checked: None,
    })
}

/// Per-axis perturbation law used by the Monte-Carlo edge experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlipModel {
    /// Standard deviation `σ` per axis.
    Gaussian,
    /// Uniform on `[−σ, σ]` per axis.
    Uniform,
}

/// Number of shards needed for `samples` Monte-Carlo samples.
pub fn shard_count(samples: u64) -> u64 {
    samples.div_ceil(MC_SHARD_SIZE)
}

/// Flips among the samples of shard `shard` (of a run with `samples` total).
///
/// A unit edge from `(0,0)` to `(1,0)` has both endpoints perturbed per axis;
/// it flips when the perturbed edge has a negative x component. Each shard
/// draws from its own ChaCha stream, so totals do not depend on how shards
/// are distributed over threads.
pub fn flip_shard(sigma_over_length: f64, model: FlipModel, samples: u64, seed: u64, shard: u64) -> u64 {
    let start = shard * MC_SHARD_SIZE;
    let count = samples.saturating_sub(start).min(MC_SHARD_SIZE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let s = sigma_over_length;
    let mut flips = 0;
    for _ in 0..count {
        let mut d = [0.0f64; 4];
        for v in &mut d {
            *v = match model {
                FlipModel::Gaussian => rng.sample::<f64, _>(StandardNormal) * s,
                FlipModel::Uniform => rng.random_range(-1.0..=1.0) * s,
            };
        }
        // d = [x0, y0, x1, y1]
        let dx = 1.0 + d[2] - d[0];
        if dx < 0.0 {
            flips += 1;
        }
    }
    flips
}

/// Monte-Carlo estimate of the 2D edge-flip probability at noise ratio `σ/|l|`.
pub fn flip_probability_mc(sigma_over_length: f64, model: FlipModel, samples: u64, seed: u64) -> Result<f64, NoiseError> {
    if samples < MIN_MC_SAMPLES {
        return Err(NoiseError::TooFewSamples(samples));
    }
    if !(sigma_over_length >= 0.0 && sigma_over_length.is_finite()) {
        return Err(NoiseError::Sigma(sigma_over_length));
    }
    let flips: u64 = (0..shard_count(samples))
        .map(|s| flip_shard(sigma_over_length, model, samples, seed, s))
        .sum();
    Ok(flips as f64 / samples as f64)
}

/// Flip probability tabulated on a uniform grid of ratios and linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipCurve {
    step: f64,
    values: Vec<f64>,
}

impl FlipCurve {
    pub fn build(model: FlipModel, max_ratio: f64, points: usize, samples: u64, seed: u64) -> Result<Self, NoiseError> {
        let points = points.max(2);
        let step = if max_ratio > 0.0 { max_ratio / (points - 1) as f64 } else { 1.0 };
        let mut values = Vec::with_capacity(points);
        for k in 0..points {
            values.push(flip_probability_mc(step * k as f64, model, samples, seed.wrapping_add(k as u64))?);
        }
        // Enforce monotonicity against sampling jitter.
        for k in 1..values.len() {
            if values[k] < values[k - 1] {
                values[k] = values[k - 1];
            }
        }
        Ok(FlipCurve { step, values })
    }

    pub fn eval(&self, ratio: f64) -> f64 {
        if !(ratio > 0.0) {
            return 0.0;
        }
        let x = ratio / self.step;
        let last = self.values.len() - 1;
        if x >= last as f64 {
            return self.values[last];
        }
        let k = x as usize;
        let t = x - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }
}

/// Expected number of flipped edges when `spec` is applied to `mesh`, from a
/// Monte-Carlo flip curve (`samples` per grid point).
///
/// Normal-direction noise moves an endpoint only by its vertex normal's
/// component along the edge; the per-edge ratio is scaled accordingly. For
/// impulse noise the probability mixes the both-endpoints and
/// single-endpoint cases.
pub fn expected_flip_count(mesh: &TriMesh, spec: &NoiseSpec, samples: u64) -> Result<f64, NoiseError> {
    spec.validate()?;
    let sigma = spec.sigma_ratio * mesh.average_edge_length().unwrap_or(0.0);
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let edges = mesh.unique_edges();
    let v = mesh.vertices();
    let normals = match spec.direction {
        NoiseDirection::Normal => mesh.vertex_normals(),
        NoiseDirection::Random => Vec::new(),
    };
    // Per-edge: (length, projection factor of endpoint a, of endpoint b)
    let per_edge: Vec<(f64, f64, f64)> = edges
        .iter()
        .map(|e| {
            let l = v[e.b] - v[e.a];
            let len = l.norm();
            match spec.direction {
                NoiseDirection::Random => (len, 1.0, 1.0),
                NoiseDirection::Normal => {
                    let dir = l.try_normalize().unwrap_or(Vec3::ZERO);
                    (len, normals[e.a].dot(dir).abs(), normals[e.b].dot(dir).abs())
                }
            }
        })
        .collect();
    let min_len = per_edge
        .iter()
        .map(|&(l, _, _)| l)
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_len.is_finite() {
        return Ok(0.0);
    }
    let model = match spec.model {
        NoiseModel::Uniform => FlipModel::Uniform,
        _ => FlipModel::Gaussian,
    };
    let curve = FlipCurve::build(model, sigma / min_len, 49, samples, spec.seed)?;
    let f = match spec.model {
        NoiseModel::Impulse => spec.impulse_fraction,
        _ => 1.0,
    };
    let sqrt_half = core::f64::consts::FRAC_1_SQRT_2;
    let total = per_edge
        .iter()
        .map(|&(len, pa, pb)| {
            if len == 0.0 {
                return 0.0;
            }
            let both = curve.eval(sigma * libm::sqrt(0.5 * (pa * pa + pb * pb)) / len);
            let single_a = curve.eval(sigma * pa * sqrt_half / len);
            let single_b = curve.eval(sigma * pb * sqrt_half / len);
            f * f * both + f * (1.0 - f) * (single_a + single_b)
        })
        .sum();
    Ok(total)
}

/// Reverses the winding of `round(fraction · faces)` randomly chosen faces.
pub fn random_orientation_flips(mesh: &TriMesh, fraction: f64, seed: u64) -> Result<TriMesh, NoiseError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(NoiseError::Fraction(fraction));
    }
    let n = mesh.face_count();
    let k = (libm::round(fraction * n as f64) as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = index::sample(&mut rng, n, k).into_vec();
    let mut out = mesh.clone();
    out.flip_faces(&chosen);
    Ok(out)
}
